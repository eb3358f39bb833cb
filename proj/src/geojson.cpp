#include "kerbside/geojson.hpp"

#include "kerbside/csv.hpp"

namespace kerbside {

nlohmann::json accessibility_map(std::span<const Segment> segments, const CollapseTable& collapse) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& s : segments) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : s.geometry) coords.push_back({p.lon, p.lat});
    if (coords.size() == 1) coords.push_back(coords.front());
    const SurfaceClass surface = s.predicted_class.value_or(s.true_class);
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties",
                         {{"segment_id", s.segment_id},
                          {"surface", canonical_name(surface)},
                          {"accessible", collapse(surface) == Accessibility::Accessible},
                          {"vote_margin", s.vote_margin},
                          {"n_frames", s.frame_ids.size()}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

void export_geojson(std::span<const Segment> segments, const std::filesystem::path& out,
                    const CollapseTable& collapse) {
  csv::write_file(out, accessibility_map(segments, collapse).dump(2) + "\n");
}

}  // namespace kerbside
