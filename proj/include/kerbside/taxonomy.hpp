#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kerbside {

// Canonical order; also the tie-break order wherever "canonical name order" applies.
enum class SurfaceClass : std::uint8_t {
  Asphalt = 0,
  Cobblestone = 1,
  Grass = 2,
  GroundUnimproved = 3,
  Pavement = 4,
  Transition = 5,
};

inline constexpr std::size_t kNumClasses = 6;

inline constexpr std::array<SurfaceClass, kNumClasses> kAllClasses = {
    SurfaceClass::Asphalt,          SurfaceClass::Cobblestone, SurfaceClass::Grass,
    SurfaceClass::GroundUnimproved, SurfaceClass::Pavement,    SurfaceClass::Transition,
};

inline constexpr std::array<SurfaceClass, kNumClasses - 1> kSurfaceClasses = {
    SurfaceClass::Asphalt,          SurfaceClass::Cobblestone, SurfaceClass::Grass,
    SurfaceClass::GroundUnimproved, SurfaceClass::Pavement,
};

constexpr std::size_t index_of(SurfaceClass c) { return static_cast<std::size_t>(c); }

// Lower-snake canonical name: "asphalt", ..., "ground_unimproved", ..., "transition".
std::string_view canonical_name(SurfaceClass c) noexcept;

// Case-insensitive. Accepts canonical names, display names ("Ground/Unimproved")
// and the fixed aliases "ground" and "unimproved". Throws UnknownClass.
SurfaceClass parse_surface_class(std::string_view name);

enum class Accessibility : std::uint8_t { Accessible, Inaccessible, Excluded };

std::string_view accessibility_name(Accessibility a) noexcept;

// Class -> accessibility policy. The default is {asphalt, pavement} accessible,
// transition excluded, everything else inaccessible.
class CollapseTable {
 public:
  CollapseTable();
  explicit CollapseTable(const std::array<Accessibility, kNumClasses>& mapping);

  Accessibility operator()(SurfaceClass c) const { return mapping_[index_of(c)]; }
  const std::array<Accessibility, kNumClasses>& mapping() const { return mapping_; }
  bool is_default() const;

  friend bool operator==(const CollapseTable&, const CollapseTable&) = default;

 private:
  std::array<Accessibility, kNumClasses> mapping_;
};

Accessibility collapse_to_accessibility(SurfaceClass c);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

struct Frame {
  std::string frame_id;
  std::int64_t timestamp_ms = 0;
  GeoPoint location;
  std::string image_ref;
  std::optional<std::string> region_id;
  std::optional<std::string> segment_id;
  std::optional<SurfaceClass> true_label;
  std::optional<SurfaceClass> predicted_label;
  std::optional<double> confidence;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Region {
  std::string region_id;
  std::string city;
  std::vector<GeoPoint> boundary;  // open ring, no repeated closing vertex

  friend bool operator==(const Region&, const Region&) = default;
};

class RegionSet {
 public:
  RegionSet() = default;
  // Validates every polygon (>= 3 vertices, simple) and unique ids.
  explicit RegionSet(std::vector<Region> regions);

  std::span<const Region> regions() const { return regions_; }
  const Region* find(std::string_view region_id) const;
  bool empty() const { return regions_.empty(); }
  std::size_t size() const { return regions_.size(); }

  // Region ids in declaration order.
  std::vector<std::string> region_ids() const;
  std::vector<std::string> region_ids_in_city(std::string_view city) const;
  // Cities in order of first appearance.
  std::vector<std::string> cities() const;

  friend bool operator==(const RegionSet&, const RegionSet&) = default;

 private:
  std::vector<Region> regions_;
};

// Frames ordered by (segment_id, timestamp_ms, frame_id); a missing segment id
// sorts first. Only non-key fields are mutable after construction.
class FrameSet {
 public:
  FrameSet() = default;
  // Throws DuplicateFrameId.
  explicit FrameSet(std::vector<Frame> frames, RegionSet regions = {});

  std::span<const Frame> frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }

  const RegionSet& regions() const { return regions_; }
  void set_regions(RegionSet regions) { regions_ = std::move(regions); }

  std::optional<std::size_t> index_of(std::string_view frame_id) const;
  const Frame* find(std::string_view frame_id) const;

  void set_region(std::size_t i, std::optional<std::string> region_id);
  void set_true_label(std::size_t i, std::optional<SurfaceClass> label);
  void set_prediction(std::size_t i, std::optional<SurfaceClass> label,
                      std::optional<double> confidence);

  // Indices sorted by (timestamp_ms, frame_id), i.e. capture order.
  std::vector<std::size_t> time_order() const;

  friend bool operator==(const FrameSet& a, const FrameSet& b) {
    return a.frames_ == b.frames_ && a.regions_ == b.regions_;
  }

 private:
  std::vector<Frame> frames_;
  RegionSet regions_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace kerbside
