#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kerbside/taxonomy.hpp"

namespace kbtest {

using namespace kerbside;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "kerbside-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Frame frame(std::string id, std::int64_t ts, double lat, double lon,
                   std::optional<SurfaceClass> label = std::nullopt,
                   std::optional<std::string> segment = std::nullopt) {
  Frame f;
  f.frame_id = std::move(id);
  f.timestamp_ms = ts;
  f.location = {lat, lon};
  f.image_ref = "images/" + f.frame_id + ".pgm";
  f.true_label = label;
  f.segment_id = std::move(segment);
  return f;
}

// Axis-aligned square with its south-west corner at (lat, lon).
inline Region square(std::string id, std::string city, double lat, double lon, double size = 0.01) {
  return {std::move(id), std::move(city), {{lat, lon}, {lat, lon + size}, {lat + size, lon + size}, {lat + size, lon}}};
}

// Frames along a line of ~1.1 m steps, 800 ms apart.
inline std::vector<Frame> track(const std::string& prefix, const std::vector<SurfaceClass>& labels,
                                double lat = 53.0, double lon = 8.0, std::int64_t t0 = 1000) {
  std::vector<Frame> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back(frame(prefix + std::to_string(i), t0 + static_cast<std::int64_t>(i) * 800,
                        lat + static_cast<double>(i) * 1e-5, lon, labels[i]));
  }
  return out;
}

constexpr auto A = SurfaceClass::Asphalt;
constexpr auto C = SurfaceClass::Cobblestone;
constexpr auto G = SurfaceClass::Grass;
constexpr auto U = SurfaceClass::GroundUnimproved;
constexpr auto P = SurfaceClass::Pavement;
constexpr auto T = SurfaceClass::Transition;

}  // namespace kbtest

// Expects `expr` to throw kerbside::Error with the given code.
#define KB_CHECK_CODE(expr, error_code)                                  \
  do {                                                                   \
    bool kb_thrown_ = false;                                             \
    try {                                                                \
      (void)(expr);                                                      \
    } catch (const kerbside::Error& kb_e_) {                             \
      kb_thrown_ = true;                                                 \
      CHECK_MESSAGE(kb_e_.code() == (error_code), kb_e_.what());         \
    }                                                                    \
    CHECK_MESSAGE(kb_thrown_, "expected " #error_code " from " #expr);   \
  } while (0)
