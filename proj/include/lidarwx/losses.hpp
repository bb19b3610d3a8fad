#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "lidarwx/error.hpp"
#include "lidarwx/grid.hpp"

namespace lidarwx {

/// Weights of the combined objective.
struct LossWeights {
  double cycle = 10.0;
  double physics = 10.0;

  void validate() const {
    if (!(std::isfinite(cycle) && cycle >= 0.0) || !(std::isfinite(physics) && physics >= 0.0)) {
      throw ContractError("loss weights must be finite and non-negative");
    }
  }
};

namespace detail {

template <typename T>
double masked_l1(std::span<const T> a, std::span<const T> b, std::span<const std::uint8_t> mask,
                 const char* what) {
  if (a.size() != b.size() || (!mask.empty() && mask.size() != a.size())) {
    throw ContractError(std::string(what) + ": shape mismatch");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    sum += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    ++n;
  }
  if (n == 0) throw ContractError(std::string(what) + ": no valid pixels");
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Mean absolute deviation between generated intensities and the physics
/// target over valid pixels (all pixels when `mask` is empty).
template <typename T>
double physics_loss(std::span<const T> generated, std::span<const T> target,
                    std::span<const std::uint8_t> mask = {}) {
  return detail::masked_l1(generated, target, mask, "physics_loss");
}

template <typename T>
double physics_loss(const Grid<T>& generated, const Grid<T>& target, const Grid<std::uint8_t>& mask) {
  require_same_shape(generated, target, "physics_loss");
  require_same_shape(generated, mask, "physics_loss");
  return physics_loss(generated.span(), target.span(), mask.span());
}

/// L1 reconstruction error in both translation directions.
template <typename T>
double cycle_loss(std::span<const T> x, std::span<const T> x_rec, std::span<const T> y,
                  std::span<const T> y_rec, std::span<const std::uint8_t> mask_x = {},
                  std::span<const std::uint8_t> mask_y = {}) {
  return detail::masked_l1(x, x_rec, mask_x, "cycle_loss") +
         detail::masked_l1(y, y_rec, mask_y, "cycle_loss");
}

inline constexpr double kProbabilityClamp = 1e-7;

struct AdversarialTerms {
  double discriminator = 0.0;  ///< -mean log D(real) - mean log(1 - D(fake))
  double generator = 0.0;      ///< -mean log D(fake), non-saturating form
};

/// Log-form adversarial losses from post-sigmoid discriminator outputs.
/// Probabilities are clamped to [1e-7, 1 - 1e-7] so every term is bounded
/// by ln(1e7).
template <typename T>
AdversarialTerms adversarial_loss_terms(std::span<const T> d_real, std::span<const T> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw ContractError("adversarial_loss_terms: empty batch");
  auto clampp = [](T v) { return std::clamp(static_cast<double>(v), kProbabilityClamp, 1.0 - kProbabilityClamp); };
  double log_real = 0.0, log_not_fake = 0.0, log_fake = 0.0;
  for (T v : d_real) log_real += std::log(clampp(v));
  for (T v : d_fake) {
    log_not_fake += std::log(1.0 - clampp(v));
    log_fake += std::log(clampp(v));
  }
  const double nr = static_cast<double>(d_real.size()), nf = static_cast<double>(d_fake.size());
  return {-log_real / nr - log_not_fake / nf, -log_fake / nf};
}

/// adv_s2r + adv_r2s + w.cycle * cycle + w.physics * physics
inline double total_loss(double adv_s2r, double adv_r2s, double cycle, double physics,
                         const LossWeights& w = {}) {
  w.validate();
  if (!std::isfinite(adv_s2r) || !std::isfinite(adv_r2s) || !std::isfinite(cycle) || !std::isfinite(physics)) {
    throw ContractError("total_loss: components must be finite");
  }
  return adv_s2r + adv_r2s + w.cycle * cycle + w.physics * physics;
}

}  // namespace lidarwx
