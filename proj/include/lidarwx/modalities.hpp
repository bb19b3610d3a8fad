#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lidarwx/error.hpp"
#include "lidarwx/io.hpp"
#include "lidarwx/kdtree.hpp"
#include "lidarwx/point_cloud.hpp"

namespace lidarwx {

using Vec3 = Eigen::Vector3d;

/// Per-point scalar together with the indices for which it is undefined
/// (zero-range points). Undefined entries hold 0.
struct PointField {
  std::vector<double> values;
  std::vector<std::size_t> invalid;
};

/// Euclidean distance of every point to the sensor origin.
inline PointField compute_range(const PointCloud& pc) {
  PointField out;
  out.values.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    out.values[i] = pc[i].range();
    if (!(out.values[i] > 0.0)) {
      out.values[i] = 0.0;
      out.invalid.push_back(i);
    }
  }
  return out;
}

/// Below this middle/largest eigenvalue ratio a neighbourhood is treated as
/// collinear (or a single repeated point).
inline constexpr double kDegenerateEigenRatio = 1e-9;
inline constexpr std::size_t kDefaultNormalNeighbors = 10;

namespace detail {

inline Vec3 radial_toward_sensor(const Point& p) {
  const Vec3 v(p.x, p.y, p.z);
  const double n = v.norm();
  return n > 0.0 ? Vec3(-v / n) : Vec3(0.0, 0.0, 0.0);
}

}  // namespace detail

/// PCA normals over the point and its k nearest neighbours, oriented to
/// face the sensor. Degenerate neighbourhoods get the radial direction.
inline std::vector<Vec3> estimate_normals(const PointCloud& pc,
                                          std::size_t k = kDefaultNormalNeighbors) {
  if (k < 3) throw ContractError("estimate_normals: k must be at least 3");
  if (pc.size() < k + 1) {
    throw ContractError("estimate_normals: k=" + std::to_string(k) + " needs at least " +
                        std::to_string(k + 1) + " points, cloud has " + std::to_string(pc.size()));
  }
  std::vector<KdTree3::Vec> pts(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) pts[i] = {pc[i].x, pc[i].y, pc[i].z};
  const KdTree3 tree(std::move(pts));

  std::vector<Vec3> normals(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3 pi(pc[i].x, pc[i].y, pc[i].z);
    const auto nn = tree.knn({pi.x(), pi.y(), pi.z()}, k, static_cast<std::uint32_t>(i));

    Vec3 mean = pi;
    for (auto j : nn) mean += Vec3(pc[j].x, pc[j].y, pc[j].z);
    mean /= static_cast<double>(nn.size() + 1);
    Eigen::Matrix3d cov = (pi - mean) * (pi - mean).transpose();
    for (auto j : nn) {
      const Vec3 d = Vec3(pc[j].x, pc[j].y, pc[j].z) - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nn.size() + 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    Vec3 n;
    if (!(ev[2] > 0.0) || ev[1] / ev[2] < kDegenerateEigenRatio) {
      n = detail::radial_toward_sensor(pc[i]);
    } else {
      n = eig.eigenvectors().col(0).normalized();
      if (n.dot(-pi) < 0.0) n = -n;
    }
    normals[i] = n;
  }
  return normals;
}

/// Angle between each normal and the direction from the point to the
/// sensor, in [0, pi/2].
inline PointField compute_incidence(const PointCloud& pc, std::span<const Vec3> normals) {
  if (normals.size() != pc.size()) throw ContractError("compute_incidence: normals must align with points");
  PointField out;
  out.values.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3 p(pc[i].x, pc[i].y, pc[i].z);
    const double r = p.norm();
    if (!(r > 0.0)) {
      out.invalid.push_back(i);
      continue;
    }
    const double c = std::clamp((-p / r).dot(normals[i]), 0.0, 1.0);
    out.values[i] = std::acos(c);
  }
  return out;
}

inline std::vector<double> lookup_reflectance(const PointCloud& pc, const MaterialTable& table) {
  std::vector<double> rho(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) rho[i] = table.reflectance(pc[i].label);
  return rho;
}

/// The three physical input modalities (range, incidence, reflectance)
/// plus the normals they were derived from.
struct PointModalities {
  std::vector<double> range;
  std::vector<double> incidence;
  std::vector<double> reflectance;
  std::vector<Vec3> normals;
  std::vector<std::size_t> invalid;  ///< zero-range points

  std::size_t size() const noexcept { return range.size(); }
};

inline PointModalities compute_modalities(const PointCloud& pc, const MaterialTable& table,
                                          std::size_t k = kDefaultNormalNeighbors) {
  PointModalities m;
  auto r = compute_range(pc);
  m.range = std::move(r.values);
  m.invalid = std::move(r.invalid);
  m.normals = estimate_normals(pc, k);
  m.incidence = compute_incidence(pc, m.normals).values;
  m.reflectance = lookup_reflectance(pc, table);
  return m;
}

/// Debug dump, one "index,R,theta,rho" row per point.
inline void write_modalities_csv(std::ostream& os, const PointModalities& m) {
  os << "index,R,theta,rho\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << i << ',' << m.range[i] << ',' << m.incidence[i] << ',' << m.reflectance[i] << '\n';
  }
  os.precision(old);
}

}  // namespace lidarwx
