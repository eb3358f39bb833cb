#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kerbside/taxonomy.hpp"

namespace kerbside {

inline constexpr std::string_view kManifestHeader =
    "frame_id,timestamp_ms,lat,lon,image_ref,segment_id,label";

// Parses manifest CSV text. Whole-file-or-nothing: the first bad row throws
// ParseError with its line and column. Rows with empty lat/lon are rejected.
FrameSet parse_manifest(std::string_view text);
FrameSet load_manifest(const std::filesystem::path& path);

std::string write_manifest(const FrameSet& frames);

// GeoJSON FeatureCollection of Polygons with properties region_id and city.
RegionSet parse_regions(std::string_view geojson);
RegionSet load_regions(const std::filesystem::path& path);
std::string write_regions(const RegionSet& regions);

struct RegionAssignment {
  FrameSet frames;
  std::size_t unassigned = 0;  // frames outside every region
};

// Throws OverlappingRegions when a frame lies in (or on the boundary of) two regions.
RegionAssignment assign_regions(FrameSet frames, const RegionSet& regions);

struct DistributionRow {
  std::string region_id;  // "" for frames outside every region
  std::string city;
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t total = 0;
};

struct DistributionTable {
  std::vector<DistributionRow> rows;  // region declaration order, unassigned last
  std::array<std::size_t, kNumClasses> class_totals{};
  std::size_t grand_total = 0;
};

// Throws UnlabeledFrames.
DistributionTable class_distribution(const FrameSet& frames);

// region,city,asphalt,...,transition,total with a trailing Total row.
std::string write_distribution_csv(const DistributionTable& table);

struct RunLengthStats {
  std::size_t run_count = 0;
  double mean_run_length = 0.0;
};

// Throws EmptySequence.
RunLengthStats run_length_stats(std::span<const SurfaceClass> labels);

}  // namespace kerbside
