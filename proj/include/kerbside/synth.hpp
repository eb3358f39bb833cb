#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerbside/image.hpp"
#include "kerbside/rng.hpp"
#include "kerbside/taxonomy.hpp"

namespace kerbside {

struct CitySpec {
  std::string name;
  int n_regions = 1;
  double style_shift = 0.0;  // city-wide texture perturbation, >= 0

  friend bool operator==(const CitySpec&, const CitySpec&) = default;
};

struct GeneratorConfig {
  std::uint64_t seed = 20210611;
  std::vector<CitySpec> cities;
  int segments_per_region = 8;
  int min_frames_per_segment = 8;
  int max_frames_per_segment = 16;
  std::array<double, kNumClasses> class_mix{};  // Transition weight is ignored
  double noise_level = 0.2;                     // [0,1], scales per-pixel sensor noise
  ImageFormat image_format = ImageFormat::Pgm;

  // Six Bremen regions (A-F) plus one region each for Hamburg (G) and
  // Hannover (H); the class mix follows the non-transition totals of the
  // reference survey (5643/5326/2754/8023/17390).
  static GeneratorConfig bremen_like();

  // Throws Config.
  void validate() const;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

nlohmann::json to_json(const GeneratorConfig& config);
// Missing keys take their bremen_like() values. Throws Config.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

// Appearance parameters shared by all frames of a region.
struct TextureStyle {
  double brightness = 0.0;  // additive offset
  double contrast = 1.0;    // multiplies deviations from mid-gray
  double scale = 1.0;       // multiplies spatial periods
  double noise_sigma = 6.0; // additive Gaussian sensor noise
};

inline constexpr int kCaptureWidth = 480;
inline constexpr int kCaptureHeight = 640;

// 480x640 portrait gray texture for a non-Transition class. Throws InvalidArgument for Transition.
Image texture(SurfaceClass cls, const TextureStyle& style, Rng& rng);
// Two textures split along a random diagonal.
Image transition_texture(SurfaceClass from, SurfaceClass to, const TextureStyle& style, Rng& rng);

struct GeneratedDataset {
  std::filesystem::path manifest;  // out_dir/manifest.csv
  std::filesystem::path regions;   // out_dir/regions.geojson
  std::filesystem::path image_root;  // out_dir (image_ref is relative to it)
  std::size_t n_frames = 0;
  std::size_t n_transitions = 0;
};

// Writes manifest.csv, regions.geojson, generator.json and images/ under out_dir.
// Deterministic for a fixed config. Throws Io.
GeneratedDataset generate(const GeneratorConfig& config, const std::filesystem::path& out_dir);

}  // namespace kerbside
