#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace lidarwx {

/// A single LiDAR return in the sensor frame.
///
/// Coordinates are meters. Intensity is the normalized return strength in
/// [0, 1]. Label is a semantic class id, 0 meaning unlabeled. Values are
/// held in double precision in memory; the on-disk formats store f32.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
  std::uint32_t label = 0;

  double range() const noexcept { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend bool operator==(const Point&, const Point&) = default;
};

struct PointCloud {
  std::vector<Point> points;
  std::string frame_id;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Point& operator[](std::size_t i) const { return points[i]; }
  Point& operator[](std::size_t i) { return points[i]; }

  /// Payload equality; frame ids are metadata and not compared.
  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.points == b.points;
  }
};

}  // namespace lidarwx
