#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/error.hpp"
#include "lidarwx/grid.hpp"
#include "lidarwx/point_cloud.hpp"

namespace lidarwx {

/// Spherical grid geometry. Defaults describe a 64-beam spinning sensor.
struct ProjectionConfig {
  std::size_t width = 2048;
  std::size_t height = 64;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;

  void validate() const {
    if (width < 1 || height < 1) throw ContractError("projection grid must be at least 1x1");
    if (!(fov_up_deg > fov_down_deg)) throw ContractError("fov_up must exceed fov_down");
  }
  friend bool operator==(const ProjectionConfig&, const ProjectionConfig&) = default;
};

struct PixelCoord {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Pixel hit by the ray through (x, y, z). Range must be positive.
inline PixelCoord pixel_of(double x, double y, double z, const ProjectionConfig& cfg) {
  const double range = std::sqrt(x * x + y * y + z * z);
  if (!(range > 0.0)) throw ContractError("cannot project a zero-range point");
  const double azimuth = std::atan2(y, x);
  const double elevation = std::asin(std::clamp(z / range, -1.0, 1.0));
  const double up = cfg.fov_up_deg * std::numbers::pi / 180.0;
  const double down = cfg.fov_down_deg * std::numbers::pi / 180.0;

  const double u = static_cast<double>(cfg.width) * (0.5 * (1.0 - azimuth / std::numbers::pi));
  const double v = static_cast<double>(cfg.height) * (up - elevation) / (up - down);
  auto clamp_index = [](double f, std::size_t n) {
    const double fl = std::floor(f);
    if (fl < 0.0) return std::size_t{0};
    if (fl > static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::size_t>(fl);
  };
  return {clamp_index(v, cfg.height), clamp_index(u, cfg.width)};
}

inline PixelCoord pixel_of(const Point& p, const ProjectionConfig& cfg) {
  return pixel_of(p.x, p.y, p.z, cfg);
}

/// Multi-channel range image with the bookkeeping needed to map pixel
/// values back onto the source cloud.
///
/// Empty pixels hold 0 in every float channel, mask 0 and kNoIndex.
struct RangeImageStack {
  static constexpr std::uint32_t kNoIndex = 0xFFFFFFFFu;

  /// Additional float plane carried alongside the core channels, e.g. a
  /// physics target. `scale` records any normalization divisor.
  struct ExtraChannel {
    std::string name;
    Grid<float> plane;
    float scale = 1.0f;
    friend bool operator==(const ExtraChannel&, const ExtraChannel&) = default;
  };

  ProjectionConfig cfg;
  Grid<float> range;
  Grid<float> incidence;
  Grid<float> reflectance;
  Grid<float> intensity;
  Grid<std::uint8_t> mask;
  Grid<std::uint32_t> index_map;
  std::vector<std::uint32_t> shadow;       ///< losers of pixel collisions, ascending
  std::vector<std::uint32_t> point_pixel;  ///< linear pixel of every source point
  std::vector<ExtraChannel> extra;

  std::size_t n_points() const noexcept { return point_pixel.size(); }
  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : mask.data()) n += m != 0;
    return n;
  }

  const ExtraChannel* find_extra(std::string_view name) const {
    for (const auto& c : extra) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  /// Inserts or replaces an extra channel.
  void set_extra(std::string name, Grid<float> plane, float scale = 1.0f) {
    require_same_shape(plane, mask, "set_extra");
    for (auto& c : extra) {
      if (c.name == name) {
        c.plane = std::move(plane);
        c.scale = scale;
        return;
      }
    }
    extra.push_back({std::move(name), std::move(plane), scale});
  }

  friend bool operator==(const RangeImageStack&, const RangeImageStack&) = default;
};

/// Projects `pc` onto a spherical grid. `incidence` and `reflectance` are
/// per-point and must align with `pc.points`.
///
/// Collisions keep the nearer point; equal ranges keep the lower index.
inline RangeImageStack project(const PointCloud& pc, std::span<const double> incidence,
                               std::span<const double> reflectance,
                               const ProjectionConfig& cfg = {}) {
  cfg.validate();
  if (incidence.size() != pc.size() || reflectance.size() != pc.size()) {
    throw ContractError("modality arrays must align with the point cloud");
  }
  if (pc.size() >= RangeImageStack::kNoIndex) throw ContractError("point cloud too large to index");

  std::vector<double> ranges(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    ranges[i] = pc[i].range();
    if (!(ranges[i] > 0.0)) {
      throw RecordError("point " + std::to_string(i) + " has zero range and cannot be projected", {i});
    }
  }

  const std::size_t h = cfg.height, w = cfg.width;
  RangeImageStack s;
  s.cfg = cfg;
  s.range = Grid<float>(h, w);
  s.incidence = Grid<float>(h, w);
  s.reflectance = Grid<float>(h, w);
  s.intensity = Grid<float>(h, w);
  s.mask = Grid<std::uint8_t>(h, w);
  s.index_map = Grid<std::uint32_t>(h, w, RangeImageStack::kNoIndex);
  s.point_pixel.resize(pc.size());

  for (std::size_t i = 0; i < pc.size(); ++i) {
    const PixelCoord px = pixel_of(pc[i], cfg);
    const std::size_t lin = px.row * w + px.col;
    s.point_pixel[i] = static_cast<std::uint32_t>(lin);
    std::uint32_t& owner = s.index_map[lin];
    if (owner == RangeImageStack::kNoIndex || ranges[i] < ranges[owner]) {
      owner = static_cast<std::uint32_t>(i);
    }
  }

  for (std::size_t lin = 0; lin < h * w; ++lin) {
    const std::uint32_t idx = s.index_map[lin];
    if (idx == RangeImageStack::kNoIndex) continue;
    s.mask[lin] = 1;
    s.range[lin] = static_cast<float>(ranges[idx]);
    s.incidence[lin] = static_cast<float>(incidence[idx]);
    s.reflectance[lin] = static_cast<float>(reflectance[idx]);
    s.intensity[lin] = static_cast<float>(pc[idx].intensity);
  }
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (s.index_map[s.point_pixel[i]] != i) s.shadow.push_back(static_cast<std::uint32_t>(i));
  }
  return s;
}

/// Copies per-pixel generated intensities back onto the projected cloud.
/// Shadowed points take the value of the pixel they fell into. Geometry and
/// labels are untouched.
inline PointCloud back_project(const RangeImageStack& stack, const Grid<float>& generated,
                               const PointCloud& pc) {
  require_same_shape(generated, stack.mask, "back_project");
  if (pc.size() != stack.n_points()) {
    throw ContractError("back_project: cloud has " + std::to_string(pc.size()) +
                        " points but the stack was built from " +
                        std::to_string(stack.n_points()));
  }
  PointCloud out = pc;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].intensity = static_cast<double>(generated[stack.point_pixel[i]]);
  }
  return out;
}

}  // namespace lidarwx
