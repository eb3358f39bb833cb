#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kerbside/image.hpp"

namespace kerbside {

struct FeatureVector {
  std::vector<double> values;
  std::string descriptor_id;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Texture descriptor over a 224x224 gray image. Layout:
//   [0, 256)    8-neighbour LBP code histogram (neighbour >= centre sets the bit,
//               clockwise from top-left, interior pixels), L1-normalised
//   [256, 272)  forward-difference gradient magnitude histogram, 16 bins of
//               width 16, last bin open-ended, L1-normalised
//   272         mean intensity / 255
//   273         intensity variance / 255^2
namespace descriptor {
inline constexpr std::size_t kLbpBins = 256;
inline constexpr std::size_t kGradientBins = 16;
inline constexpr std::size_t kLbpOffset = 0;
inline constexpr std::size_t kGradientOffset = kLbpBins;
inline constexpr std::size_t kMeanIndex = kLbpBins + kGradientBins;
inline constexpr std::size_t kVarianceIndex = kMeanIndex + 1;
inline constexpr std::size_t kLength = kVarianceIndex + 1;
inline constexpr double kGradientBinWidth = 16.0;
inline constexpr std::string_view kId = "lbp8x256+gradmag16w16+moments2@224gray";
}  // namespace descriptor

// RGB input is converted with Rec. 601 weights. Throws WrongSize unless 224x224.
FeatureVector extract_features(const Image& img);

}  // namespace kerbside
