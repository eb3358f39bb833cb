#include "kerbside/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kerbside::geo {
namespace {

// Coordinates are degrees; 1e-12 deg is well under a millimetre.
constexpr double kEps = 1e-12;

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
  return (a.lat - o.lat) * (b.lon - o.lon) - (a.lon - o.lon) * (b.lat - o.lat);
}

bool within_box(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  return p.lat >= std::min(a.lat, b.lat) - kEps && p.lat <= std::max(a.lat, b.lat) + kEps &&
         p.lon >= std::min(a.lon, b.lon) - kEps && p.lon <= std::max(a.lon, b.lon) + kEps;
}

bool on_edge(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  return std::abs(cross(a, b, p)) <= kEps && within_box(a, b, p);
}

int sign(double v) { return v > kEps ? 1 : (v < -kEps ? -1 : 0); }

bool edges_touch(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
  const int d1 = sign(cross(a, b, c));
  const int d2 = sign(cross(a, b, d));
  const int d3 = sign(cross(c, d, a));
  const int d4 = sign(cross(c, d, b));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && within_box(a, b, c)) return true;
  if (d2 == 0 && within_box(a, b, d)) return true;
  if (d3 == 0 && within_box(c, d, a)) return true;
  if (d4 == 0 && within_box(c, d, b)) return true;
  return false;
}

}  // namespace

bool on_boundary(std::span<const GeoPoint> polygon, const GeoPoint& p) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_edge(polygon[i], polygon[(i + 1) % n], p)) return true;
  }
  return false;
}

bool contains(std::span<const GeoPoint> polygon, const GeoPoint& p) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  if (on_boundary(polygon, p)) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = polygon[i];
    const GeoPoint& b = polygon[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double lon_at = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < lon_at) inside = !inside;
    }
  }
  return inside;
}

bool is_simple(std::span<const GeoPoint> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a = polygon[i];
    const GeoPoint& b = polygon[(i + 1) % n];
    if (std::abs(a.lat - b.lat) <= kEps && std::abs(a.lon - b.lon) <= kEps) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (edges_touch(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) {
        return false;
      }
    }
  }
  // Adjacent edges folding back onto each other.
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& prev = polygon[(i + n - 1) % n];
    const GeoPoint& cur = polygon[i];
    const GeoPoint& next = polygon[(i + 1) % n];
    if (sign(cross(prev, cur, next)) == 0) {
      const double dot = (cur.lat - prev.lat) * (next.lat - cur.lat) +
                         (cur.lon - prev.lon) * (next.lon - cur.lon);
      if (dot < 0) return false;
    }
  }
  return true;
}

double distance_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusM = 6371008.8;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double mean_lat = 0.5 * (a.lat + b.lat) * kRad;
  const double dx = (b.lon - a.lon) * kRad * std::cos(mean_lat);
  const double dy = (b.lat - a.lat) * kRad;
  return kEarthRadiusM * std::sqrt(dx * dx + dy * dy);
}

}  // namespace kerbside::geo
