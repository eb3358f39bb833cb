#include "kerbside/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <tuple>

#include "kerbside/error.hpp"
#include "kerbside/geo.hpp"

namespace kerbside {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Alias {
  std::string_view name;
  SurfaceClass cls;
};

// Fixed at compile time; not user-extensible.
constexpr Alias kAliases[] = {
    {"asphalt", SurfaceClass::Asphalt},
    {"cobblestone", SurfaceClass::Cobblestone},
    {"cobblestones", SurfaceClass::Cobblestone},
    {"grass", SurfaceClass::Grass},
    {"ground_unimproved", SurfaceClass::GroundUnimproved},
    {"ground/unimproved", SurfaceClass::GroundUnimproved},
    {"groundunimproved", SurfaceClass::GroundUnimproved},
    {"ground", SurfaceClass::GroundUnimproved},
    {"unimproved", SurfaceClass::GroundUnimproved},
    {"pavement", SurfaceClass::Pavement},
    {"transition", SurfaceClass::Transition},
};

}  // namespace

std::string_view canonical_name(SurfaceClass c) noexcept {
  switch (c) {
    case SurfaceClass::Asphalt: return "asphalt";
    case SurfaceClass::Cobblestone: return "cobblestone";
    case SurfaceClass::Grass: return "grass";
    case SurfaceClass::GroundUnimproved: return "ground_unimproved";
    case SurfaceClass::Pavement: return "pavement";
    case SurfaceClass::Transition: return "transition";
  }
  return "?";
}

SurfaceClass parse_surface_class(std::string_view name) {
  auto trimmed = name;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.remove_prefix(1);
  }
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.remove_suffix(1);
  }
  const std::string key = lower(trimmed);
  for (const auto& alias : kAliases) {
    if (alias.name == key) return alias.cls;
  }
  throw Error(ErrorCode::UnknownClass, "unknown surface class '" + std::string(name) + "'");
}

std::string_view accessibility_name(Accessibility a) noexcept {
  switch (a) {
    case Accessibility::Accessible: return "accessible";
    case Accessibility::Inaccessible: return "inaccessible";
    case Accessibility::Excluded: return "excluded";
  }
  return "?";
}

CollapseTable::CollapseTable()
    : mapping_{Accessibility::Accessible,   Accessibility::Inaccessible,
               Accessibility::Inaccessible, Accessibility::Inaccessible,
               Accessibility::Accessible,   Accessibility::Excluded} {}

CollapseTable::CollapseTable(const std::array<Accessibility, kNumClasses>& mapping)
    : mapping_(mapping) {
  // Transition is never a segment class, so it must stay excluded.
  if (mapping_[index_of(SurfaceClass::Transition)] != Accessibility::Excluded) {
    throw Error(ErrorCode::Config, "transition must collapse to 'excluded'");
  }
  for (auto c : kSurfaceClasses) {
    if (mapping_[index_of(c)] == Accessibility::Excluded) {
      throw Error(ErrorCode::Config,
                  "only transition may be excluded, not " + std::string(canonical_name(c)));
    }
  }
}

bool CollapseTable::is_default() const { return *this == CollapseTable{}; }

Accessibility collapse_to_accessibility(SurfaceClass c) { return CollapseTable{}(c); }

bool is_valid(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

RegionSet::RegionSet(std::vector<Region> regions) : regions_(std::move(regions)) {
  std::set<std::string> seen;
  for (const auto& r : regions_) {
    if (r.region_id.empty()) throw Error(ErrorCode::InvalidRegion, "region without region_id");
    if (!seen.insert(r.region_id).second) {
      throw Error(ErrorCode::InvalidRegion, "duplicate region_id '" + r.region_id + "'");
    }
    if (r.boundary.size() < 3) {
      throw Error(ErrorCode::InvalidRegion,
                  "region '" + r.region_id + "' has fewer than 3 vertices");
    }
    for (const auto& p : r.boundary) {
      if (!is_valid(p)) {
        throw Error(ErrorCode::InvalidRegion,
                    "region '" + r.region_id + "' has an out-of-range vertex");
      }
    }
    if (!geo::is_simple(r.boundary)) {
      throw Error(ErrorCode::InvalidRegion, "region '" + r.region_id + "' self-intersects");
    }
  }
}

const Region* RegionSet::find(std::string_view region_id) const {
  for (const auto& r : regions_) {
    if (r.region_id == region_id) return &r;
  }
  return nullptr;
}

std::vector<std::string> RegionSet::region_ids() const {
  std::vector<std::string> out;
  for (const auto& r : regions_) out.push_back(r.region_id);
  return out;
}

std::vector<std::string> RegionSet::region_ids_in_city(std::string_view city) const {
  std::vector<std::string> out;
  for (const auto& r : regions_) {
    if (r.city == city) out.push_back(r.region_id);
  }
  return out;
}

std::vector<std::string> RegionSet::cities() const {
  std::vector<std::string> out;
  for (const auto& r : regions_) {
    if (std::find(out.begin(), out.end(), r.city) == out.end()) out.push_back(r.city);
  }
  return out;
}

FrameSet::FrameSet(std::vector<Frame> frames, RegionSet regions)
    : frames_(std::move(frames)), regions_(std::move(regions)) {
  std::sort(frames_.begin(), frames_.end(), [](const Frame& a, const Frame& b) {
    const std::string_view sa = a.segment_id ? std::string_view(*a.segment_id) : "";
    const std::string_view sb = b.segment_id ? std::string_view(*b.segment_id) : "";
    const bool ha = a.segment_id.has_value();
    const bool hb = b.segment_id.has_value();
    return std::tie(ha, sa, a.timestamp_ms, a.frame_id) <
           std::tie(hb, sb, b.timestamp_ms, b.frame_id);
  });
  by_id_.reserve(frames_.size());
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (!by_id_.emplace(frames_[i].frame_id, i).second) {
      throw Error(ErrorCode::DuplicateFrameId, "duplicate frame_id '" + frames_[i].frame_id + "'");
    }
  }
}

std::optional<std::size_t> FrameSet::index_of(std::string_view frame_id) const {
  auto it = by_id_.find(std::string(frame_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Frame* FrameSet::find(std::string_view frame_id) const {
  auto i = index_of(frame_id);
  return i ? &frames_[*i] : nullptr;
}

void FrameSet::set_region(std::size_t i, std::optional<std::string> region_id) {
  frames_.at(i).region_id = std::move(region_id);
}

void FrameSet::set_true_label(std::size_t i, std::optional<SurfaceClass> label) {
  frames_.at(i).true_label = label;
}

void FrameSet::set_prediction(std::size_t i, std::optional<SurfaceClass> label,
                              std::optional<double> confidence) {
  frames_.at(i).predicted_label = label;
  frames_.at(i).confidence = confidence;
}

std::vector<std::size_t> FrameSet::time_order() const {
  std::vector<std::size_t> idx(frames_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
    return std::tie(frames_[a].timestamp_ms, frames_[a].frame_id) <
           std::tie(frames_[b].timestamp_ms, frames_[b].frame_id);
  });
  return idx;
}

}  // namespace kerbside
