#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lidarwx/io.hpp"
#include "lidarwx/physics.hpp"
#include "lidarwx/point_cloud.hpp"
#include "lidarwx/rng.hpp"

namespace lidarwx {

/// Procedural street scene scanned by an idealised spinning LiDAR. Used as
/// a stand-in for simulator output in tests, benchmarks and training
/// fixtures.
struct SceneConfig {
  std::size_t beams = 64;
  std::size_t columns = 1024;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;
  double sensor_height = 1.73;
  double max_range = 80.0;
  std::size_t n_buildings = 8;
  std::size_t n_cars = 10;
  std::size_t n_poles = 12;
  std::size_t n_trees = 10;
};

struct SyntheticScan {
  PointCloud cloud;                    ///< intensity = clear-weather Lambertian return
  std::vector<Eigen::Vector3d> normals;  ///< analytic surface normals, sensor-facing
};

namespace detail {

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  std::uint32_t label = 0;
};

struct Box {
  Eigen::Vector3d lo, hi;
  std::uint32_t label;
};
struct Cylinder {
  double cx, cy, radius, z0, z1;
  std::uint32_t label;
};
struct Sphere {
  Eigen::Vector3d c;
  double radius;
  std::uint32_t label;
};

inline void hit_box(const Box& b, const Eigen::Vector3d& d, Hit& best) {
  double tmin = 0.0, tmax = best.t;
  int axis = -1;
  double sign = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d[a]) < 1e-15) {
      if (0.0 < b.lo[a] || 0.0 > b.hi[a]) return;
      continue;
    }
    double t0 = b.lo[a] / d[a], t1 = b.hi[a] / d[a];
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > tmin) {
      tmin = t0;
      axis = a;
      sign = s;
    }
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return;
  }
  if (axis < 0 || !(tmin < best.t)) return;  // origin inside the box
  best.t = tmin;
  best.normal = Eigen::Vector3d::Zero();
  best.normal[axis] = sign;
  best.label = b.label;
}

inline void hit_cylinder(const Cylinder& c, const Eigen::Vector3d& d, Hit& best) {
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a < 1e-15) return;
  const double b = -2.0 * (d.x() * c.cx + d.y() * c.cy);
  const double cc = c.cx * c.cx + c.cy * c.cy - c.radius * c.radius;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (!(t > 0.0) || !(t < best.t)) return;
  const double z = t * d.z();
  if (z < c.z0 || z > c.z1) return;
  best.t = t;
  best.normal = Eigen::Vector3d(t * d.x() - c.cx, t * d.y() - c.cy, 0.0).normalized();
  best.label = c.label;
}

inline void hit_sphere(const Sphere& s, const Eigen::Vector3d& d, Hit& best) {
  const double b = -2.0 * d.dot(s.c);
  const double cc = s.c.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * cc;
  if (disc < 0.0) return;
  const double t = (-b - std::sqrt(disc)) / 2.0;
  if (!(t > 0.0) || !(t < best.t)) return;
  best.t = t;
  best.normal = (t * d - s.c).normalized();
  best.label = s.label;
}

}  // namespace detail

/// Ray-casts a random scene drawn from `seed`. Intensities are the clamped
/// clear-weather Lambertian returns from the default material table.
inline SyntheticScan synthesize_scan(std::uint64_t seed, const SceneConfig& cfg = {},
                                     const MaterialTable& table = default_material_table()) {
  CounterRng rng(seed, 0x5CE4E);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  auto side = [&]() { return rng.uniform() < 0.5 ? -1.0 : 1.0; };
  const double g = -cfg.sensor_height;

  std::vector<detail::Box> boxes;
  std::vector<detail::Cylinder> cylinders;
  std::vector<detail::Sphere> spheres;
  for (std::size_t i = 0; i < cfg.n_buildings; ++i) {
    const double x = uni(-60.0, 60.0), y = side() * uni(10.0, 22.0);
    const double hx = uni(3.0, 9.0), hy = uni(2.0, 5.0);
    boxes.push_back({{x - hx, y - hy, g}, {x + hx, y + hy, g + uni(4.0, 15.0)}, 50});
  }
  for (std::size_t i = 0; i < cfg.n_cars; ++i) {
    double x = uni(-40.0, 40.0);
    if (std::fabs(x) < 5.0) x += x < 0 ? -5.0 : 5.0;
    const double y = side() * uni(1.5, 3.5);
    boxes.push_back({{x - 2.2, y - 0.9, g}, {x + 2.2, y + 0.9, g + uni(1.4, 1.7)}, 10});
  }
  for (std::size_t i = 0; i < cfg.n_poles; ++i) {
    cylinders.push_back({uni(-50.0, 50.0), side() * uni(5.0, 6.5), 0.12, g, g + 6.0, 80});
  }
  for (std::size_t i = 0; i < cfg.n_trees; ++i) {
    const double x = uni(-50.0, 50.0), y = side() * uni(6.5, 9.5);
    cylinders.push_back({x, y, 0.25, g, g + 3.0, 71});
    spheres.push_back({{x, y, g + 4.0}, uni(1.5, 2.5), 70});
  }

  SyntheticScan scan;
  scan.cloud.frame_id = "synthetic_" + std::to_string(seed);
  const double up = cfg.fov_up_deg * std::numbers::pi / 180.0;
  const double down = cfg.fov_down_deg * std::numbers::pi / 180.0;
  for (std::size_t b = 0; b < cfg.beams; ++b) {
    const double elev = up - (static_cast<double>(b) + 0.5) / static_cast<double>(cfg.beams) * (up - down);
    for (std::size_t c = 0; c < cfg.columns; ++c) {
      const double az = std::numbers::pi * (1.0 - 2.0 * (static_cast<double>(c) + 0.5) / static_cast<double>(cfg.columns));
      const Eigen::Vector3d d(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
      detail::Hit hit;
      hit.t = cfg.max_range;
      hit.label = 0xFFFFFFFFu;
      if (d.z() < 0.0) {
        const double t = g / d.z();
        if (t < hit.t) {
          hit.t = t;
          hit.normal = Eigen::Vector3d(0.0, 0.0, 1.0);
          const double y = t * d.y();
          hit.label = std::fabs(y) < 4.0 ? 40u : (std::fabs(y) < 6.5 ? 48u : 72u);
        }
      }
      for (const auto& box : boxes) detail::hit_box(box, d, hit);
      for (const auto& cyl : cylinders) detail::hit_cylinder(cyl, d, hit);
      for (const auto& sph : spheres) detail::hit_sphere(sph, d, hit);
      if (hit.label == 0xFFFFFFFFu) continue;

      const Eigen::Vector3d p = hit.t * d;
      Eigen::Vector3d n = hit.normal;
      if (n.dot(-d) < 0.0) n = -n;
      const double theta = std::acos(std::clamp(n.dot(-d), 0.0, 1.0));
      const double inten = std::min(1.0, physics_intensity(table.reflectance(hit.label), theta, hit.t));
      scan.cloud.points.push_back({p.x(), p.y(), p.z(), inten, hit.label});
      scan.normals.push_back(n);
    }
  }
  return scan;
}

}  // namespace lidarwx
