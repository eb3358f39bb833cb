#pragma once

#include <filesystem>
#include <span>

#include <nlohmann/json.hpp>

#include "kerbside/segments.hpp"

namespace kerbside {

// FeatureCollection with one LineString per segment ([lon, lat] order).
// Properties: segment_id, surface, accessible, vote_margin, n_frames.
// surface is the predicted class when present, the ground truth otherwise.
// A single-frame segment repeats its only vertex so the LineString stays valid.
nlohmann::json accessibility_map(std::span<const Segment> segments, const CollapseTable& collapse = {});

// Throws Io.
void export_geojson(std::span<const Segment> segments, const std::filesystem::path& out,
                    const CollapseTable& collapse = {});

}  // namespace kerbside
