#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/error.hpp"
#include "lidarwx/grid.hpp"

namespace lidarwx {

inline constexpr std::size_t kDefaultPdfBins = 256;
inline constexpr double kHistogramSmoothing = 1e-10;

/// Uniform histogram of intensities over [0, 1]. Values outside the range
/// are counted in the edge bins; 1.0 falls in the last bin.
class IntensityHistogram {
 public:
  explicit IntensityHistogram(std::size_t n_bins = kDefaultPdfBins,
                              double smoothing = kHistogramSmoothing)
      : counts_(n_bins, 0), smoothing_(smoothing) {
    if (n_bins < 2) throw ContractError("histogram needs at least 2 bins");
    if (!(smoothing > 0.0)) throw ContractError("histogram smoothing must be positive");
  }

  template <std::floating_point T>
  static IntensityHistogram from_samples(std::span<const T> values,
                                         std::size_t n_bins = kDefaultPdfBins,
                                         double smoothing = kHistogramSmoothing) {
    IntensityHistogram h(n_bins, smoothing);
    h.add(values);
    return h;
  }

  std::size_t bin_of(double v) const noexcept {
    const auto n = counts_.size();
    if (!(v > 0.0)) return 0;
    const auto b = static_cast<std::size_t>(v * static_cast<double>(n));
    return std::min(b, n - 1);
  }

  void add(double v) {
    ++counts_[bin_of(v)];
    ++total_;
  }
  template <std::floating_point T>
  void add(std::span<const T> values) {
    for (T v : values) add(static_cast<double>(v));
  }

  /// Counts add, so merging is associative and order-independent.
  void merge(const IntensityHistogram& other) {
    if (!same_binning(other)) throw ContractError("cannot merge histograms with different binning");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
  }

  bool same_binning(const IntensityHistogram& o) const noexcept {
    return counts_.size() == o.counts_.size() && smoothing_ == o.smoothing_;
  }

  std::size_t n_bins() const noexcept { return counts_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  double smoothing() const noexcept { return smoothing_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  double bin_center(std::size_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(counts_.size());
  }

  /// Relative frequencies with `smoothing` added per bin, renormalized.
  /// Every entry is strictly positive.
  std::vector<double> probs() const {
    const double n = static_cast<double>(counts_.size());
    const double denom = 1.0 + n * smoothing_;
    std::vector<double> p(counts_.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double freq = total_ ? static_cast<double>(counts_[i]) / static_cast<double>(total_) : 1.0 / n;
      p[i] = (freq + smoothing_) / denom;
    }
    return p;
  }

  /// probs() divided by the bin width, i.e. a density on [0, 1].
  std::vector<double> pdf() const {
    auto p = probs();
    for (double& v : p) v *= static_cast<double>(p.size());
    return p;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  double smoothing_;
};

/// KL(p || q) in nats over identically binned, smoothed histograms.
inline double kl_divergence(const IntensityHistogram& p, const IntensityHistogram& q) {
  if (!p.same_binning(q)) throw ContractError("kl_divergence: histograms use different binning");
  const auto pp = p.probs();
  const auto qq = q.probs();
  double kl = 0.0;
  for (std::size_t i = 0; i < pp.size(); ++i) kl += pp[i] * std::log(pp[i] / qq[i]);
  return std::max(0.0, kl);
}

/// Mean squared error over positions where `mask` is non-zero (all
/// positions when the mask is empty).
template <std::floating_point T>
double mse(std::span<const T> a, std::span<const T> b, std::span<const std::uint8_t> mask = {}) {
  if (a.size() != b.size() || (!mask.empty() && mask.size() != a.size())) {
    throw ContractError("mse: inputs must have equal shapes");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
    ++n;
  }
  if (n == 0) throw ContractError("mse: no valid positions");
  return sum / static_cast<double>(n);
}

template <std::floating_point T>
double mse(const std::vector<T>& a, const std::vector<T>& b, std::span<const std::uint8_t> mask = {}) {
  return mse(std::span<const T>(a), std::span<const T>(b), mask);
}

// --------------------------------------------------------------------------
// SSIM
// --------------------------------------------------------------------------

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_kernel_1d(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = static_cast<double>(i) - c;
    k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  const double s = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= s;
  return k;
}

/// Separable 'valid' Gaussian filtering; output is (H-w+1) x (W-w+1).
inline Grid<double> filter_valid(const Grid<double>& img, const std::vector<double>& k) {
  const std::size_t w = k.size();
  const std::size_t oh = img.height() - w + 1, ow = img.width() - w + 1;
  Grid<double> tmp(img.height(), ow);
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += k[j] * img(r, c + j);
      tmp(r, c) = acc;
    }
  }
  Grid<double> out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += k[j] * tmp(r + j, c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Local SSIM map over every full window position ('valid' region). Entry
/// (r, c) belongs to the window whose top-left corner is (r, c).
template <typename T>
Grid<double> ssim_map(const Grid<T>& a, const Grid<T>& b, const SsimParams& prm = {}) {
  require_same_shape(a, b, "ssim");
  if (a.height() < prm.window || a.width() < prm.window) {
    throw ContractError("ssim: image " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                        " is smaller than the " + std::to_string(prm.window) + "x" +
                        std::to_string(prm.window) + " window");
  }
  const std::size_t h = a.height(), w = a.width();
  Grid<double> x(h, w), y(h, w), xx(h, w), yy(h, w), xy(h, w);
  for (std::size_t i = 0; i < h * w; ++i) {
    x[i] = static_cast<double>(a[i]);
    y[i] = static_cast<double>(b[i]);
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = detail::gaussian_kernel_1d(prm.window, prm.sigma);
  const auto mx = detail::filter_valid(x, k), my = detail::filter_valid(y, k);
  const auto sxx = detail::filter_valid(xx, k), syy = detail::filter_valid(yy, k),
             sxy = detail::filter_valid(xy, k);
  const double c1 = std::pow(prm.k1 * prm.dynamic_range, 2);
  const double c2 = std::pow(prm.k2 * prm.dynamic_range, 2);
  Grid<double> out(mx.height(), mx.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    out[i] = ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return out;
}

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5).
template <typename T>
double ssim(const Grid<T>& a, const Grid<T>& b, const SsimParams& prm = {}) {
  const auto m = ssim_map(a, b, prm);
  return std::accumulate(m.data().begin(), m.data().end(), 0.0) / static_cast<double>(m.size());
}

/// Mean local SSIM over windows whose centre pixel is valid in `mask`.
/// Falls back to the unmasked mean when no window centre is valid.
template <typename T>
double ssim_masked(const Grid<T>& a, const Grid<T>& b, const Grid<std::uint8_t>& mask,
                   const SsimParams& prm = {}) {
  require_same_shape(a, mask, "ssim_masked");
  const auto m = ssim_map(a, b, prm);
  const std::size_t half = prm.window / 2;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < m.height(); ++r) {
    for (std::size_t c = 0; c < m.width(); ++c) {
      if (!mask(r + half, c + half)) continue;
      sum += m(r, c);
      ++n;
    }
  }
  if (n == 0) return std::accumulate(m.data().begin(), m.data().end(), 0.0) / static_cast<double>(m.size());
  return sum / static_cast<double>(n);
}

// --------------------------------------------------------------------------
// Wasserstein-1
// --------------------------------------------------------------------------

/// W1 between two empirical distributions, the integral of |F_a - F_b|,
/// evaluated exactly by sweeping the merged sorted samples.
template <std::floating_point T>
double wasserstein_1d(std::span<const T> a, std::span<const T> b) {
  if (a.empty() || b.empty()) throw ContractError("wasserstein_1d: empty sample set");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(sa.front(), sb.front());
  double dist = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double next = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    // F_a and F_b are constant on [prev, next)
    dist += std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < sa.size() && sa[i] == next) ++i;
    while (j < sb.size() && sb[j] == next) ++j;
    prev = next;
  }
  return dist;
}

template <std::floating_point T>
double wasserstein_1d(const std::vector<T>& a, const std::vector<T>& b) {
  return wasserstein_1d(std::span<const T>(a), std::span<const T>(b));
}

// --------------------------------------------------------------------------
// Error histogram
// --------------------------------------------------------------------------

inline constexpr std::size_t kDefaultErrorBins = 201;

/// Histogram of differences a - b over [-1, 1]. The bin count is odd so a
/// bin is centred on zero and the layout is symmetric.
struct ErrorHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  explicit ErrorHistogram(std::size_t n_bins = kDefaultErrorBins) : counts(n_bins, 0) {
    if (n_bins < 1 || n_bins % 2 == 0) throw ContractError("error histogram needs an odd bin count");
  }
  std::size_t n_bins() const noexcept { return counts.size(); }
  double bin_width() const noexcept { return 2.0 / static_cast<double>(counts.size()); }
  double bin_center(std::size_t i) const noexcept {
    return -1.0 + (static_cast<double>(i) + 0.5) * bin_width();
  }
  std::size_t bin_of(double e) const noexcept {
    const double f = (e + 1.0) / bin_width();
    if (!(f > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(f), counts.size() - 1);
  }
  void add(double e) {
    ++counts[bin_of(e)];
    ++total;
  }
  void merge(const ErrorHistogram& o) {
    if (o.counts.size() != counts.size()) throw ContractError("cannot merge error histograms with different binning");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    total += o.total;
  }
  std::vector<double> probs() const {
    std::vector<double> p(counts.size(), 0.0);
    if (total == 0) return p;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return p;
  }
};

template <std::floating_point T>
ErrorHistogram error_histogram(std::span<const T> a, std::span<const T> b,
                               std::size_t n_bins = kDefaultErrorBins,
                               std::span<const std::uint8_t> mask = {}) {
  if (a.size() != b.size() || (!mask.empty() && mask.size() != a.size())) {
    throw ContractError("error_histogram: inputs must have equal shapes");
  }
  ErrorHistogram h(n_bins);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    h.add(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  }
  return h;
}

}  // namespace lidarwx
