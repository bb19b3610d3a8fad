#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/error.hpp"

namespace lidarwx {

enum class Condition { clear, rain, snow };

inline Condition parse_condition(std::string_view s) {
  if (s == "clear") return Condition::clear;
  if (s == "rain") return Condition::rain;
  if (s == "snow") return Condition::snow;
  throw ContractError("unknown weather condition '" + std::string(s) + "'");
}

inline std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::rain: return "rain";
    case Condition::snow: return "snow";
    default: return "clear";
  }
}

/// Lambertian backscatter: rho * cos(theta) / R, floored at 0.
inline double physics_intensity(double reflectance, double incidence, double range) {
  if (!(range > 0.0)) throw DomainError("physics_intensity: range must be positive");
  return std::max(0.0, reflectance * std::cos(incidence) / range);
}

/// Extinction coefficient (1/km) from precipitation rate (mm/hr):
/// alpha = 1.45 * Rr^0.64.
inline double derive_alpha(double rain_rate_mm_hr) {
  if (!(rain_rate_mm_hr >= 0.0)) throw DomainError("derive_alpha: precipitation rate must be >= 0");
  if (rain_rate_mm_hr == 0.0) return 0.0;
  return 1.45 * std::pow(rain_rate_mm_hr, 0.64);
}

/// Meters per kilometer: alpha is per km while ranges are meters.
inline constexpr double kDefaultRangeUnitScale = 1000.0;
inline constexpr double kDefaultRainRate = 30.0;

/// Two-way Beer-Lambert attenuation through a homogeneous medium.
inline double attenuate(double intensity, double alpha, double range,
                        double range_unit_scale = kDefaultRangeUnitScale) {
  return intensity * std::exp(-2.0 * alpha * (range / range_unit_scale));
}

/// Constant-extinction segment [start, end) of a beam path, in meters.
struct AlphaSegment {
  double start = 0.0;
  double end = 0.0;
  double alpha = 0.0;
};

/// Two-way attenuation along a piecewise-constant extinction profile that
/// starts at the sensor. Segments must be contiguous and non-empty.
inline double attenuate_path(double intensity, std::span<const AlphaSegment> profile,
                             double range_unit_scale = kDefaultRangeUnitScale) {
  if (profile.empty()) throw ContractError("attenuate_path: empty extinction profile");
  if (profile.front().start != 0.0) throw ContractError("attenuate_path: profile must start at the sensor (s = 0)");
  double optical_depth = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const auto& seg = profile[j];
    if (!(seg.end > seg.start)) throw ContractError("attenuate_path: segment " + std::to_string(j) + " is empty or reversed");
    if (!(seg.alpha >= 0.0)) throw ContractError("attenuate_path: negative extinction in segment " + std::to_string(j));
    if (j > 0 && seg.start != profile[j - 1].end) {
      throw ContractError(seg.start > profile[j - 1].end
                              ? "attenuate_path: gap before segment " + std::to_string(j)
                              : "attenuate_path: overlap before segment " + std::to_string(j));
    }
    optical_depth += seg.alpha * (seg.end - seg.start);
  }
  return intensity * std::exp(-2.0 * optical_depth / range_unit_scale);
}

struct WeatherParams {
  Condition condition = Condition::rain;
  double rain_rate = kDefaultRainRate;  ///< mm/hr
  std::optional<double> alpha_override;  ///< 1/km
  double range_unit_scale = kDefaultRangeUnitScale;
  double noise_threshold = 0.03;  ///< on the [0,1] intensity scale
  std::uint64_t seed = 0;

  double alpha() const {
    if (condition == Condition::clear) return 0.0;
    if (alpha_override) {
      if (!(*alpha_override >= 0.0)) throw DomainError("extinction coefficient must be >= 0");
      return *alpha_override;
    }
    return derive_alpha(rain_rate);
  }

  void validate() const {
    if (!(rain_rate >= 0.0)) throw DomainError("precipitation rate must be >= 0");
    if (!(range_unit_scale > 0.0)) throw ContractError("range_unit_scale must be positive");
    if (!(noise_threshold >= 0.0)) throw ContractError("noise threshold must be >= 0");
    (void)alpha();
  }
};

/// Adverse-weather physics target for one frame.
struct PhysicsTarget {
  std::vector<double> raw;         ///< attenuated intensity before scaling
  std::vector<double> normalized;  ///< raw / max, or raw when max == 0
  double max = 0.0;                ///< divisor used; 0 means not normalized
  bool normalized_applied = false;
  std::vector<std::string> warnings;
};

/// Composes Lambertian backscatter and homogeneous attenuation per element
/// and rescales the frame to [0,1] by its maximum. Elements with range <= 0
/// (or excluded by `valid`) yield 0.
inline PhysicsTarget physics_target_frame(std::span<const double> reflectance,
                                          std::span<const double> incidence,
                                          std::span<const double> range, const WeatherParams& weather,
                                          std::span<const std::uint8_t> valid = {}) {
  if (reflectance.size() != range.size() || incidence.size() != range.size() ||
      (!valid.empty() && valid.size() != range.size())) {
    throw ContractError("physics_target_frame: modality arrays must align");
  }
  weather.validate();
  const double alpha = weather.alpha();
  PhysicsTarget t;
  t.raw.assign(range.size(), 0.0);
  for (std::size_t i = 0; i < range.size(); ++i) {
    if ((!valid.empty() && !valid[i]) || !(range[i] > 0.0)) continue;
    const double phy = physics_intensity(reflectance[i], incidence[i], range[i]);
    t.raw[i] = attenuate(phy, alpha, range[i], weather.range_unit_scale);
    t.max = std::max(t.max, t.raw[i]);
  }
  t.normalized = t.raw;
  if (t.max > 0.0) {
    for (double& v : t.normalized) v /= t.max;
    t.normalized_applied = true;
  } else {
    t.max = 0.0;
    t.warnings.emplace_back("all-zero physics target; normalization skipped");
  }
  return t;
}

}  // namespace lidarwx
