#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "combination.hpp"
#include "error.hpp"
#include "hierarchy.hpp"

namespace o4ast {

struct GeoPoint {
  double lat = 0.0;
  double lng = 0.0;
};

// Local equirectangular georeference. The origin is the north-west corner
// of atomic cell (0, 0); rows grow southward, columns eastward. Cells are
// square with side cell_meters. Cell membership is half-open: a point on
// the west or south edge belongs to the cell.
struct Georef {
  double origin_lat = 0.0;
  double origin_lng = 0.0;
  double cell_meters = 150.0;

  static constexpr double kMetersPerDegLat = 111320.0;

  double meters_per_deg_lng() const {
    return kMetersPerDegLat * std::cos(origin_lat * M_PI / 180.0);
  }

  // Planar meters relative to the origin: x east, y south.
  std::pair<double, double> to_xy(double lat, double lng) const {
    return {(lng - origin_lng) * meters_per_deg_lng(),
            (origin_lat - lat) * kMetersPerDegLat};
  }

  // Atomic cell containing the point, or (-1, -1) when outside [0,rows)x[0,cols).
  std::pair<int, int> cell_of(double lat, double lng, int rows, int cols) const {
    const auto [x, y] = to_xy(lat, lng);
    const double fi = y / cell_meters;
    const double fj = x / cell_meters;
    // Row interval is (south, north] in latitude, i.e. [i, i+1) in y with
    // the northern edge y == i belonging to the cell above.
    int i = static_cast<int>(std::floor(fi));
    if (fi == std::floor(fi)) i -= 1;
    const int j = static_cast<int>(std::floor(fj));
    if (i < 0 || j < 0 || i >= rows || j >= cols) return {-1, -1};
    return {i, j};
  }
};

namespace geo_detail {

struct XY {
  double x, y;
};

inline bool point_in_polygon_evenodd(const std::vector<XY>& poly, double px, double py) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const XY& a = poly[i];
    const XY& b = poly[j];
    if ((a.y > py) != (b.y > py)) {
      const double xint = (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x;
      if (px < xint) inside = !inside;
    }
  }
  return inside;
}

inline bool segments_properly_intersect(XY p1, XY p2, XY q1, XY q2) {
  auto cross = [](XY o, XY a, XY b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline bool ring_self_intersects(const std::vector<XY>& ring) {
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share an endpoint).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(ring[i], ring[(i + 1) % n], ring[j],
                                      ring[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

}  // namespace geo_detail

// Rasterize a closed polygon ring: a cell is set iff its center lies
// inside the polygon under the even-odd rule. Padding cells stay zero.
inline RasterRegion rasterize_polygon(const std::vector<GeoPoint>& path,
                                      const Georef& geo, const HierarchyConfig& cfg) {
  std::vector<GeoPoint> ring = path;
  if (ring.size() >= 2 && ring.front().lat == ring.back().lat &&
      ring.front().lng == ring.back().lng)
    ring.pop_back();  // accept explicitly closed rings
  if (ring.size() < 3)
    raise(ErrorKind::Config, "polygon needs at least 3 distinct vertices");

  std::vector<geo_detail::XY> poly;
  poly.reserve(ring.size());
  for (const auto& p : ring) {
    const auto [x, y] = geo.to_xy(p.lat, p.lng);
    poly.push_back({x, y});
  }
  if (geo_detail::ring_self_intersects(poly))
    raise(ErrorKind::Config, "self-intersecting polygon ring rejected");

  RasterRegion region;
  region.mask = SignedGrid(cfg.height(), cfg.width());
  bool any = false;
  for (int i = 0; i < cfg.raw_height(); ++i) {
    for (int j = 0; j < cfg.raw_width(); ++j) {
      const double cx = (j + 0.5) * geo.cell_meters;
      const double cy = (i + 0.5) * geo.cell_meters;
      if (geo_detail::point_in_polygon_evenodd(poly, cx, cy)) {
        region.mask.at(i, j) = 1;
        any = true;
      }
    }
  }
  if (!any)
    raise(ErrorKind::EmptyRegion, "polygon covers no atomic cell center");
  return region;
}

}  // namespace o4ast
