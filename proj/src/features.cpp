#include "kerbside/features.hpp"

#include <algorithm>
#include <cmath>

#include "kerbside/error.hpp"

namespace kerbside {

FeatureVector extract_features(const Image& input) {
  if (input.width() != kModelInputSize || input.height() != kModelInputSize) {
    throw Error(ErrorCode::WrongSize, "extract_features expects 224x224, got " +
                                          std::to_string(input.width()) + "x" +
                                          std::to_string(input.height()));
  }
  const Image img = to_gray(input);
  const int w = img.width();
  const int h = img.height();

  FeatureVector fv;
  fv.descriptor_id = std::string(descriptor::kId);
  fv.values.assign(descriptor::kLength, 0.0);

  static constexpr int kDx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  static constexpr int kDy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const int centre = img.at(x, y);
      int code = 0;
      for (int k = 0; k < 8; ++k) {
        if (img.at(x + kDx[k], y + kDy[k]) >= centre) code |= 1 << k;
      }
      fv.values[descriptor::kLbpOffset + code] += 1.0;
    }
  }
  const double lbp_count = static_cast<double>(w - 2) * (h - 2);
  for (std::size_t i = 0; i < descriptor::kLbpBins; ++i) {
    fv.values[descriptor::kLbpOffset + i] /= lbp_count;
  }

  for (int y = 0; y < h - 1; ++y) {
    for (int x = 0; x < w - 1; ++x) {
      const double gx = img.at(x + 1, y) - img.at(x, y);
      const double gy = img.at(x, y + 1) - img.at(x, y);
      const double mag = std::sqrt(gx * gx + gy * gy);
      const auto bin = std::min<std::size_t>(descriptor::kGradientBins - 1,
                                             static_cast<std::size_t>(mag / descriptor::kGradientBinWidth));
      fv.values[descriptor::kGradientOffset + bin] += 1.0;
    }
  }
  const double grad_count = static_cast<double>(w - 1) * (h - 1);
  for (std::size_t i = 0; i < descriptor::kGradientBins; ++i) {
    fv.values[descriptor::kGradientOffset + i] /= grad_count;
  }

  double sum = 0.0;
  for (auto p : img.pixels()) sum += p;
  const double n = static_cast<double>(img.pixels().size());
  const double mean = sum / n;
  double sq = 0.0;
  for (auto p : img.pixels()) sq += (p - mean) * (p - mean);
  fv.values[descriptor::kMeanIndex] = mean / 255.0;
  fv.values[descriptor::kVarianceIndex] = (sq / n) / (255.0 * 255.0);
  return fv;
}

}  // namespace kerbside
