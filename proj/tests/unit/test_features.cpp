#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kerbside/error.hpp"
#include "kerbside/features.hpp"
#include "kerbside/image.hpp"
#include "support.hpp"

using namespace kbtest;
namespace d = kerbside::descriptor;

namespace {

double block_sum(const FeatureVector& f, std::size_t offset, std::size_t n) {
  return std::accumulate(f.values.begin() + static_cast<long>(offset),
                         f.values.begin() + static_cast<long>(offset + n), 0.0);
}

}  // namespace

TEST_CASE("constant image") {
  const auto f = extract_features(Image(224, 224, 1, 120));
  REQUIRE(f.values.size() == d::kLength);
  CHECK(f.descriptor_id == d::kId);
  // all neighbours equal the centre: every bit set
  CHECK(f.values[d::kLbpOffset + 255] == 1.0);
  CHECK(f.values[d::kGradientOffset + 0] == 1.0);
  CHECK(f.values[d::kMeanIndex] == doctest::Approx(120.0 / 255.0));
  CHECK(f.values[d::kVarianceIndex] == 0.0);
}

TEST_CASE("period-2 vertical stripes put gradient mass in high bins") {
  Image img(224, 224, 1);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) img.at(x, y) = (x % 2) ? 230 : 20;
  }
  const auto f = extract_features(img);

  // direct pixel loop oracle
  std::array<double, 16> hist{};
  for (int y = 0; y + 1 < 224; ++y) {
    for (int x = 0; x + 1 < 224; ++x) {
      const double gx = double(img.at(x + 1, y)) - img.at(x, y);
      const double gy = double(img.at(x, y + 1)) - img.at(x, y);
      const int bin = std::min(15, static_cast<int>(std::sqrt(gx * gx + gy * gy) / 16.0));
      hist[bin] += 1.0;
    }
  }
  for (auto& h : hist) h /= 223.0 * 223.0;
  for (int b = 0; b < 16; ++b) CHECK(f.values[d::kGradientOffset + b] == doctest::Approx(hist[b]).epsilon(1e-12));
  // |230 - 20| = 210 lands in bin 13
  CHECK(f.values[d::kGradientOffset + 13] == doctest::Approx(1.0));
  CHECK(block_sum(f, d::kGradientOffset, 8) == 0.0);
}

TEST_CASE("histogram blocks are L1-normalised and values finite") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Image img(224, 224, trial % 2 ? 3 : 1);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng() % (1 + trial * 25));
    const auto f = extract_features(img);
    CHECK(block_sum(f, d::kLbpOffset, d::kLbpBins) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(block_sum(f, d::kGradientOffset, d::kGradientBins) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : f.values) CHECK(std::isfinite(v));
  }
}

TEST_CASE("LBP codes against a hand-built neighbourhood") {
  // Centre 100 with only the right-hand neighbour (bit 3) brighter, elsewhere darker.
  Image img(224, 224, 1, 0);
  img.at(100, 100) = 100;
  img.at(101, 100) = 200;
  const auto f = extract_features(img);
  const double n = 222.0 * 222.0;
  // the centre pixel itself yields code 1<<3
  CHECK(f.values[8] * n >= 1.0);
}

TEST_CASE("extract_features is a pure function of the pixel grid") {
  std::mt19937 rng(10);
  Image img(224, 224, 1);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng());
  const Image copy(224, 224, 1, std::vector<std::uint8_t>(img.pixels().begin(), img.pixels().end()));
  CHECK(extract_features(img) == extract_features(copy));
  // RGB with equal channels describes the same as the gray image
  Image rgb(224, 224, 3);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) {
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y);
    }
  }
  CHECK(extract_features(rgb) == extract_features(img));
}

TEST_CASE("wrong input size") {
  KB_CHECK_CODE(extract_features(Image(480, 480, 1)), ErrorCode::WrongSize);
  KB_CHECK_CODE(extract_features(Image(224, 223, 1)), ErrorCode::WrongSize);
}
