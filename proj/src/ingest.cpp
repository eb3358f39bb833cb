#include "kerbside/ingest.hpp"

#include <charconv>
#include <map>
#include <nlohmann/json.hpp>

#include "kerbside/csv.hpp"
#include "kerbside/error.hpp"
#include "kerbside/geo.hpp"
#include "kerbside/text.hpp"

namespace kerbside {
namespace {

using json = nlohmann::json;

enum Column : std::size_t { kFrameId, kTimestamp, kLat, kLon, kImageRef, kSegmentId, kLabel, kColumns };

constexpr std::array<std::string_view, kColumns> kColumnNames = {
    "frame_id", "timestamp_ms", "lat", "lon", "image_ref", "segment_id", "label"};

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

double parse_coordinate(const csv::Record& rec, std::size_t col, double limit) {
  const std::string& s = rec.fields[col];
  if (s.empty()) throw ParseError(rec.line, col + 1, std::string(kColumnNames[col]) + " is empty");
  const auto v = text::parse_double(s);
  if (!v) throw ParseError(rec.line, col + 1, "'" + s + "' is not a number");
  if (!(*v >= -limit && *v <= limit)) {
    throw ParseError(rec.line, col + 1,
                     std::string(kColumnNames[col]) + " " + s + " out of range");
  }
  return *v;
}

}  // namespace

FrameSet parse_manifest(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty()) throw ParseError(1, 1, "missing header row");

  const auto& header = records.front();
  if (header.fields.size() != kColumns) {
    throw ParseError(header.line, 1,
                     "header must be '" + std::string(kManifestHeader) + "'");
  }
  for (std::size_t c = 0; c < kColumns; ++c) {
    if (trim(header.fields[c]) != kColumnNames[c]) {
      throw ParseError(header.line, c + 1,
                       "expected column '" + std::string(kColumnNames[c]) + "'");
    }
  }

  std::vector<Frame> frames;
  frames.reserve(records.size() - 1);
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != kColumns) {
      throw ParseError(rec.line, std::min<std::size_t>(rec.fields.size(), kColumns) + 1,
                       "expected " + std::to_string(kColumns) + " fields, got " +
                           std::to_string(rec.fields.size()));
    }
    Frame f;
    f.frame_id = trim(rec.fields[kFrameId]);
    if (f.frame_id.empty()) throw ParseError(rec.line, kFrameId + 1, "frame_id is empty");
    if (auto [it, inserted] = seen.emplace(f.frame_id, rec.line); !inserted) {
      throw Error(ErrorCode::DuplicateFrameId, "duplicate frame_id '" + f.frame_id +
                                                   "' on lines " + std::to_string(it->second) +
                                                   " and " + std::to_string(rec.line));
    }
    const auto ts = text::parse_int64(trim(rec.fields[kTimestamp]));
    if (!ts) {
      throw ParseError(rec.line, kTimestamp + 1,
                       "timestamp_ms '" + rec.fields[kTimestamp] + "' is not an integer");
    }
    f.timestamp_ms = *ts;
    f.location.lat = parse_coordinate(rec, kLat, 90.0);
    f.location.lon = parse_coordinate(rec, kLon, 180.0);
    f.image_ref = trim(rec.fields[kImageRef]);
    if (auto seg = trim(rec.fields[kSegmentId]); !seg.empty()) f.segment_id = seg;
    if (auto label = trim(rec.fields[kLabel]); !label.empty()) {
      try {
        f.true_label = parse_surface_class(label);
      } catch (const Error& e) {
        throw ParseError(rec.line, kLabel + 1, e.what());
      }
    }
    frames.push_back(std::move(f));
  }
  return FrameSet(std::move(frames));
}

FrameSet load_manifest(const std::filesystem::path& path) {
  return parse_manifest(csv::read_file(path));
}

std::string write_manifest(const FrameSet& frames) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& f : frames.frames()) {
    out += csv::join({f.frame_id, std::to_string(f.timestamp_ms), text::format_double(f.location.lat),
                      text::format_double(f.location.lon), f.image_ref, f.segment_id.value_or(""),
                      f.true_label ? std::string(canonical_name(*f.true_label)) : ""});
    out += '\n';
  }
  return out;
}

RegionSet parse_regions(std::string_view geojson) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw ParseError(0, e.byte, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError(0, 0, "region file must be a GeoJSON FeatureCollection");
  }
  std::vector<Region> regions;
  std::size_t index = 0;
  for (const auto& feature : doc["features"]) {
    const std::string where = "feature " + std::to_string(index++);
    try {
      const auto& geometry = feature.at("geometry");
      if (geometry.at("type").get<std::string>() != "Polygon") {
        throw ParseError(0, 0, where + ": geometry must be a Polygon");
      }
      const auto& props = feature.at("properties");
      Region region;
      region.region_id = props.at("region_id").get<std::string>();
      region.city = props.value("city", std::string{});
      const auto& rings = geometry.at("coordinates");
      if (!rings.is_array() || rings.empty()) throw ParseError(0, 0, where + ": empty polygon");
      for (const auto& pos : rings.at(0)) {
        region.boundary.push_back({pos.at(1).get<double>(), pos.at(0).get<double>()});
      }
      if (region.boundary.size() >= 2 && region.boundary.front() == region.boundary.back()) {
        region.boundary.pop_back();
      }
      regions.push_back(std::move(region));
    } catch (const json::exception& e) {
      throw ParseError(0, 0, where + ": " + e.what());
    }
  }
  return RegionSet(std::move(regions));
}

RegionSet load_regions(const std::filesystem::path& path) {
  return parse_regions(csv::read_file(path));
}

std::string write_regions(const RegionSet& regions) {
  json features = json::array();
  for (const auto& r : regions.regions()) {
    json ring = json::array();
    for (const auto& p : r.boundary) ring.push_back({p.lon, p.lat});
    ring.push_back({r.boundary.front().lon, r.boundary.front().lat});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"region_id", r.region_id}, {"city", r.city}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(2) + "\n";
}

RegionAssignment assign_regions(FrameSet frames, const RegionSet& regions) {
  RegionAssignment out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& p = frames[i].location;
    std::vector<std::string> hits;
    for (const auto& r : regions.regions()) {
      if (geo::contains(r.boundary, p)) hits.push_back(r.region_id);
    }
    if (hits.size() > 1) {
      std::string list;
      for (const auto& h : hits) list += (list.empty() ? "" : ",") + h;
      throw Error(ErrorCode::OverlappingRegions,
                  "frame '" + frames[i].frame_id + "' lies in regions [" + list + "]");
    }
    if (hits.empty()) {
      frames.set_region(i, std::nullopt);
      ++out.unassigned;
    } else {
      frames.set_region(i, hits.front());
    }
  }
  frames.set_regions(regions);
  out.frames = std::move(frames);
  return out;
}

DistributionTable class_distribution(const FrameSet& frames) {
  std::size_t unlabeled = 0;
  for (const auto& f : frames.frames()) {
    if (!f.true_label) ++unlabeled;
  }
  if (unlabeled) {
    throw Error(ErrorCode::UnlabeledFrames,
                std::to_string(unlabeled) + " frame(s) have no ground-truth label");
  }

  DistributionTable table;
  std::map<std::string, std::size_t> row_of;
  for (const auto& r : frames.regions().regions()) {
    row_of.emplace(r.region_id, table.rows.size());
    table.rows.push_back({r.region_id, r.city, {}, 0});
  }
  std::optional<DistributionRow> unassigned;
  for (const auto& f : frames.frames()) {
    DistributionRow* row = nullptr;
    if (f.region_id) {
      auto it = row_of.find(*f.region_id);
      if (it == row_of.end()) {
        row_of.emplace(*f.region_id, table.rows.size());
        table.rows.push_back({*f.region_id, "", {}, 0});
        it = row_of.find(*f.region_id);
      }
      row = &table.rows[it->second];
    } else {
      if (!unassigned) unassigned = DistributionRow{};
      row = &*unassigned;
    }
    ++row->counts[index_of(*f.true_label)];
    ++row->total;
  }
  if (unassigned) table.rows.push_back(*unassigned);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < kNumClasses; ++c) table.class_totals[c] += row.counts[c];
    table.grand_total += row.total;
  }
  return table;
}

std::string write_distribution_csv(const DistributionTable& table) {
  std::vector<std::string> header = {"region", "city"};
  for (auto c : kAllClasses) header.emplace_back(canonical_name(c));
  header.emplace_back("total");
  std::string out = csv::join(header) + "\n";
  auto emit = [&out](std::string region, std::string city,
                     const std::array<std::size_t, kNumClasses>& counts, std::size_t total) {
    std::vector<std::string> fields = {std::move(region), std::move(city)};
    for (auto n : counts) fields.push_back(std::to_string(n));
    fields.push_back(std::to_string(total));
    out += csv::join(fields) + "\n";
  };
  for (const auto& row : table.rows) {
    emit(row.region_id.empty() ? "(unassigned)" : row.region_id, row.city, row.counts, row.total);
  }
  emit("Total", "", table.class_totals, table.grand_total);
  return out;
}

RunLengthStats run_length_stats(std::span<const SurfaceClass> labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptySequence, "run_length_stats of empty sequence");
  std::size_t runs = 1;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) ++runs;
  }
  return {runs, static_cast<double>(labels.size()) / static_cast<double>(runs)};
}

}  // namespace kerbside
