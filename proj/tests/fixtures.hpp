#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lidarwx/point_cloud.hpp"
#include "lidarwx/projection.hpp"
#include "lidarwx/synthetic.hpp"

namespace fixture {

/// Random cloud with float-representable coordinates in a 100 m cube,
/// intensities in [0,1] and labels below 100.
inline lidarwx::PointCloud random_cloud(std::size_t n, std::uint64_t seed, bool labels = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> coord(-50.0f, 50.0f), unit(0.0f, 1.0f);
  std::uniform_int_distribution<std::uint32_t> lab(0, 99);
  lidarwx::PointCloud pc;
  pc.points.reserve(n);
  while (pc.size() < n) {
    lidarwx::Point p{coord(rng), coord(rng), coord(rng), unit(rng), labels ? lab(rng) : 0u};
    if (p.range() > 0.5) pc.points.push_back(p);
  }
  return pc;
}

/// Sparse scan-like cloud: `n` distinct firing slots of a W x H scanner,
/// each producing one return at the centre of its pixel's solid angle,
/// random range in [2, 80] m.
inline lidarwx::PointCloud sparse_scan(std::size_t n, std::uint64_t seed, const lidarwx::ProjectionConfig& cfg) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> slots(cfg.width * cfg.height);
  for (std::uint32_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::shuffle(slots.begin(), slots.end(), rng);
  std::uniform_real_distribution<double> range(2.0, 80.0), unit(0.0, 1.0);
  const double up = cfg.fov_up_deg * std::numbers::pi / 180.0, down = cfg.fov_down_deg * std::numbers::pi / 180.0;
  lidarwx::PointCloud pc;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t row = slots[k] / cfg.width, col = slots[k] % cfg.width;
    const double el = up - (static_cast<double>(row) + 0.5) / static_cast<double>(cfg.height) * (up - down);
    const double az = std::numbers::pi * (1.0 - 2.0 * (static_cast<double>(col) + 0.5) / static_cast<double>(cfg.width));
    const double r = range(rng);
    pc.points.push_back({r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az), r * std::sin(el), unit(rng), 0});
  }
  return pc;
}

/// 100 points scattered on the plane z = 5 above the sensor.
inline lidarwx::PointCloud plane_cloud() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  lidarwx::PointCloud pc;
  for (int i = 0; i < 100; ++i) pc.points.push_back({u(rng), u(rng), 5.0, 0.5, 0});
  return pc;
}

/// Fibonacci lattice on a sphere of radius 10 centred on the sensor. The
/// default density gives about 16 cm spacing.
inline lidarwx::PointCloud sphere_cloud(std::size_t n = 50000) {
  lidarwx::PointCloud pc;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z), phi = golden * static_cast<double>(i);
    pc.points.push_back({10.0 * r * std::cos(phi), 10.0 * r * std::sin(phi), 10.0 * z, 0.5, 0});
  }
  return pc;
}

/// Exactly `n` points taken at an even stride from a synthetic street
/// scan. This is the scan-like fixture used by the augmentation checks.
inline lidarwx::PointCloud scan_cloud(std::size_t n, std::uint64_t seed) {
  const auto scan = lidarwx::synthesize_scan(seed);
  lidarwx::PointCloud pc;
  pc.frame_id = scan.cloud.frame_id;
  const std::size_t total = scan.cloud.size();
  for (std::size_t k = 0; k < n && k < total; ++k) pc.points.push_back(scan.cloud[k * total / n]);
  return pc;
}

}  // namespace fixture
