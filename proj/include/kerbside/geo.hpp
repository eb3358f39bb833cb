#pragma once

#include <span>

#include "kerbside/taxonomy.hpp"

namespace kerbside::geo {

// Planar treatment of (lat, lon). Regions are a few km across at most.

// Even-odd ray casting; points on an edge count as inside.
bool contains(std::span<const GeoPoint> polygon, const GeoPoint& p);

bool on_boundary(std::span<const GeoPoint> polygon, const GeoPoint& p);

// True when the closed ring has no two non-adjacent edges that touch and no
// zero-length edge.
bool is_simple(std::span<const GeoPoint> polygon);

// Equirectangular approximation, metres.
double distance_m(const GeoPoint& a, const GeoPoint& b);

}  // namespace kerbside::geo
