#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lidarwx/error.hpp"
#include "lidarwx/modalities.hpp"
#include "lidarwx/physics.hpp"
#include "lidarwx/point_cloud.hpp"
#include "lidarwx/rng.hpp"

namespace lidarwx {

/// Exponential drop-size distribution N(D) = N0 exp(-Lambda D) whose
/// parameters are power laws of the precipitation rate Rr (mm/hr):
///   N0     = n0_coeff     * Rr^n0_exp       [m^-3 mm^-1]
///   Lambda = lambda_coeff * Rr^lambda_exp   [mm^-1]
struct DropSizeFit {
  double n0_coeff = 8000.0;
  double n0_exp = 0.0;
  double lambda_coeff = 4.1;
  double lambda_exp = -0.21;

  /// Marshall-Palmer rain.
  static constexpr DropSizeFit rain() { return {8000.0, 0.0, 4.1, -0.21}; }
  /// Gunn-Marshall snow (Rr as melted-water equivalent).
  static constexpr DropSizeFit snow() { return {3800.0, -0.87, 2.55, -0.48}; }
};

/// Particle population and beam geometry used to place virtual scatterers.
struct ScattererModel {
  DropSizeFit fit = DropSizeFit::rain();
  double beam_divergence = 3e-3;        ///< full cone angle, rad
  double particle_reflectivity = 0.05;  ///< backscatter of a D_ref particle at 1 m
  double reference_diameter = 1.0;      ///< D_ref, mm
  std::size_t max_particles = 10000;    ///< cap on particles sampled per beam
  std::uint32_t noise_label = 0;        ///< label given to noise points

  static ScattererModel rain() { return {}; }
  static ScattererModel snow() {
    ScattererModel m;
    m.fit = DropSizeFit::snow();
    m.particle_reflectivity = 0.1;
    return m;
  }
  static ScattererModel for_condition(Condition c) {
    return c == Condition::snow ? snow() : rain();
  }

  double n0(double rate) const {
    if (!(rate > 0.0)) return fit.n0_exp == 0.0 ? fit.n0_coeff : 0.0;
    return fit.n0_coeff * std::pow(rate, fit.n0_exp);
  }
  double lambda(double rate) const {
    if (!(rate > 0.0)) return fit.lambda_exp < 0.0 ? INFINITY : fit.lambda_coeff;
    return fit.lambda_coeff * std::pow(rate, fit.lambda_exp);
  }
  /// Particles per m^3: integral of N(D) over D > 0, i.e. N0 / Lambda.
  double number_density(double rate) const {
    const double l = lambda(rate);
    const double n = n0(rate);
    if (!(n > 0.0) || !std::isfinite(l) || !std::isfinite(n)) return 0.0;
    return n / l;
  }
  /// Volume of the beam cone out to `range` meters.
  double cone_volume(double range) const {
    const double t = std::tan(0.5 * beam_divergence);
    return std::numbers::pi * t * t * range * range * range / 3.0;
  }

  void validate() const {
    if (!(fit.n0_coeff >= 0.0) || !(fit.lambda_coeff > 0.0)) {
      throw ContractError("drop-size fit needs N0 >= 0 and Lambda > 0");
    }
    if (!(beam_divergence > 0.0) || !(beam_divergence < std::numbers::pi)) {
      throw ContractError("beam divergence must lie in (0, pi)");
    }
    if (!(particle_reflectivity >= 0.0) || !(reference_diameter > 0.0)) {
      throw ContractError("particle reflectivity must be >= 0 and reference diameter > 0");
    }
  }
};

struct Scatterer {
  double range = 0.0;     ///< meters from the sensor
  double diameter = 0.0;  ///< mm
};

/// Draws the particles inside one beam cone out to `max_range`.
///
/// The count is Poisson with mean density * cone volume (capped at
/// max_particles). Positions are uniform in cone volume, so the range pdf
/// grows as r^2. Diameters come from the exponential size distribution by
/// inverse CDF.
inline std::vector<Scatterer> sample_scatterers(double max_range, const WeatherParams& weather,
                                                const ScattererModel& model, CounterRng& rng) {
  if (!(max_range > 0.0)) throw ContractError("sample_scatterers: max_range must be positive");
  std::vector<Scatterer> out;
  if (weather.condition == Condition::clear) return out;
  const double density = model.number_density(weather.rain_rate);
  const double mean = density * model.cone_volume(max_range);
  if (!(mean > 0.0)) return out;
  const double lambda = model.lambda(weather.rain_rate);
  const auto count = std::min<std::uint64_t>(sample_poisson(rng, mean), model.max_particles);
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const double r = max_range * std::cbrt(rng.uniform_open0());
    const double d = -std::log(rng.uniform_open0()) / lambda;
    out.push_back({r, d});
  }
  return out;
}

/// Backscattered power of one particle: reflectivity * (D/D_ref)^2 / R_s^2.
inline double scatterer_power(const Scatterer& s, const ScattererModel& model) {
  const double rel = s.diameter / model.reference_diameter;
  return model.particle_reflectivity * rel * rel / (s.range * s.range);
}

struct AugmentReport {
  std::size_t n_input = 0;
  std::size_t n_dropped = 0;          ///< original returns removed (includes replaced)
  std::size_t n_below_threshold = 0;  ///< of which: attenuated below the noise threshold
  std::size_t n_noise_added = 0;      ///< noise returns that replaced an original
  std::size_t n_output = 0;
  double drop_fraction = 0.0;
  double intensity_scale = 0.0;  ///< clear-weather frame maximum used to normalize returns
  std::uint64_t seed = 0;

  std::string to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"n_input\":" << n_input << ",\"n_dropped\":" << n_dropped
       << ",\"n_below_threshold\":" << n_below_threshold << ",\"n_noise_added\":" << n_noise_added
       << ",\"n_output\":" << n_output << ",\"drop_fraction\":" << drop_fraction
       << ",\"intensity_scale\":" << intensity_scale << ",\"seed\":" << seed << "}";
    return os.str();
  }
  friend bool operator==(const AugmentReport&, const AugmentReport&) = default;
};

struct ClearIntensity {
  std::vector<double> values;  ///< Lambertian intensity / scale
  double scale = 1.0;          ///< frame maximum, 1 for an all-zero frame
};

/// Lambertian intensities of a frame normalized by their maximum.
inline ClearIntensity clear_weather_intensity(const PointModalities& mod) {
  ClearIntensity c;
  c.values.resize(mod.size());
  double mx = 0.0;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    c.values[i] = physics_intensity(mod.reflectance[i], mod.incidence[i], mod.range[i]);
    mx = std::max(mx, c.values[i]);
  }
  if (mx > 0.0) {
    c.scale = mx;
    for (double& v : c.values) v /= mx;
  }
  return c;
}

enum class BeamOutcome : std::uint8_t { kept, dropped, noise };

struct AugmentResult {
  PointCloud cloud;
  AugmentReport report;
  std::vector<std::uint32_t> source;  ///< input index of every output point
  std::vector<BeamOutcome> outcome;   ///< per input point
};

namespace detail {

struct BeamResult {
  BeamOutcome outcome = BeamOutcome::dropped;
  bool below_threshold = false;
  Point point;
};

inline BeamResult simulate_beam(const Point& p, double range, double clear_intensity, double alpha,
                                std::size_t index, const WeatherParams& weather,
                                const ScattererModel& model) {
  BeamResult res;
  const double object = attenuate(clear_intensity, alpha, range, weather.range_unit_scale);
  CounterRng rng(weather.seed, index);
  const auto particles = sample_scatterers(range, weather, model, rng);
  double best_power = -1.0;
  const Scatterer* best = nullptr;
  for (const auto& s : particles) {
    const double pw = scatterer_power(s, model);
    if (pw > best_power) {
      best_power = pw;
      best = &s;
    }
  }
  if (best && best_power > object && best_power > weather.noise_threshold) {
    const double t = best->range / range;
    res.outcome = BeamOutcome::noise;
    res.point = Point{p.x * t, p.y * t, p.z * t, std::min(best_power, 1.0), model.noise_label};
  } else if (object < weather.noise_threshold) {
    res.outcome = BeamOutcome::dropped;
    res.below_threshold = true;
  } else {
    res.outcome = BeamOutcome::kept;
    res.point = p;
    res.point.intensity = std::min(object, 1.0);
  }
  return res;
}

}  // namespace detail

/// Degrades a clear-weather cloud with precipitation: beams whose strongest
/// sampled particle outshines the attenuated target return from the
/// particle instead; beams attenuated below the noise threshold are
/// dropped; surviving beams carry the attenuated Lambertian intensity.
///
/// Target returns are compared on the normalized scale: the Lambertian
/// intensity of every point is divided by the frame's clear-weather
/// maximum before attenuation, so the threshold and the particle powers
/// live on the same [0,1] scale as stored intensities.
///
/// Output order follows input order and does not depend on `threads`.
inline AugmentResult augment(const PointCloud& pc, const PointModalities& mod,
                             const WeatherParams& weather, const ScattererModel& model,
                             unsigned threads = 1) {
  if (weather.condition == Condition::clear) {
    throw ContractError("augment: clear weather has nothing to simulate; use the input cloud as is");
  }
  if (mod.size() != pc.size() || mod.incidence.size() != pc.size() ||
      mod.reflectance.size() != pc.size()) {
    throw ContractError("augment: modalities must align with the point cloud");
  }
  weather.validate();
  model.validate();
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (!(mod.range[i] > 0.0)) throw RecordError("augment: point " + std::to_string(i) + " has zero range", {i});
  }
  const double alpha = weather.alpha();
  const auto clear = clear_weather_intensity(mod);

  std::vector<detail::BeamResult> beams(pc.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      beams[i] = detail::simulate_beam(pc[i], mod.range[i], clear.values[i], alpha, i, weather, model);
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || pc.size() < 2) {
    work(0, pc.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (pc.size() + threads - 1) / threads;
    for (std::size_t lo = 0; lo < pc.size(); lo += chunk) {
      pool.emplace_back(work, lo, std::min(pc.size(), lo + chunk));
    }
    for (auto& t : pool) t.join();
  }

  AugmentResult r;
  r.cloud.frame_id = pc.frame_id;
  r.outcome.resize(pc.size());
  r.report.n_input = pc.size();
  r.report.seed = weather.seed;
  r.report.intensity_scale = clear.scale;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto& b = beams[i];
    r.outcome[i] = b.outcome;
    if (b.outcome != BeamOutcome::kept) ++r.report.n_dropped;
    if (b.below_threshold) ++r.report.n_below_threshold;
    if (b.outcome == BeamOutcome::noise) ++r.report.n_noise_added;
    if (b.outcome != BeamOutcome::dropped) {
      r.cloud.points.push_back(b.point);
      r.source.push_back(static_cast<std::uint32_t>(i));
    }
  }
  r.report.n_output = r.cloud.size();
  r.report.drop_fraction =
      pc.empty() ? 0.0 : static_cast<double>(r.report.n_dropped) / static_cast<double>(pc.size());
  return r;
}

}  // namespace lidarwx
