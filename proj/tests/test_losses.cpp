#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lidarwx/losses.hpp"

using namespace lidarwx;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double recount_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

using Span = std::span<const double>;

}  // namespace

TEST(PhysicsLoss, Examples) {
  std::mt19937_64 rng(1);
  const auto t = random_vec(64, rng);
  EXPECT_EQ(physics_loss(Span(t), Span(t)), 0.0);
  auto g = t;
  for (auto& v : g) v += 0.1;
  EXPECT_NEAR(physics_loss(Span(g), Span(t)), 0.1, 1e-15);
}

TEST(PhysicsLoss, RecountAndMask) {
  std::mt19937_64 rng(2);
  const auto a = random_vec(1000, rng), b = random_vec(1000, rng);
  EXPECT_NEAR(physics_loss(Span(a), Span(b)), recount_l1(a, b), 1e-12);
  std::vector<std::uint8_t> mask(1000, 0);
  std::vector<double> ka, kb;
  for (std::size_t i = 0; i < 1000; i += 3) {
    mask[i] = 1;
    ka.push_back(a[i]);
    kb.push_back(b[i]);
  }
  EXPECT_NEAR(physics_loss(Span(a), Span(b), mask), recount_l1(ka, kb), 1e-12);
  std::vector<std::uint8_t> none(1000, 0);
  EXPECT_THROW(physics_loss(Span(a), Span(b), none), ContractError);
  EXPECT_THROW(physics_loss(Span(a), Span(b.data(), 10)), ContractError);
}

TEST(PhysicsLoss, GridOverload) {
  Grid<float> g(2, 2, 0.5f), t(2, 2, 0.25f);
  Grid<std::uint8_t> m(2, 2, 1);
  m(0, 0) = 0;
  g(0, 0) = 100.0f;
  EXPECT_NEAR(physics_loss(g, t, m), 0.25, 1e-7);
  EXPECT_THROW(physics_loss(g, Grid<float>(2, 3), m), ContractError);
}

TEST(PhysicsLoss, LipschitzInGenerated) {
  std::mt19937_64 rng(3);
  const auto t = random_vec(200, rng), g1 = random_vec(200, rng), g2 = random_vec(200, rng);
  const double d = std::fabs(physics_loss(Span(g1), Span(t)) - physics_loss(Span(g2), Span(t)));
  EXPECT_LE(d, recount_l1(g1, g2) + 1e-15);
}

TEST(CycleLoss, Examples) {
  std::mt19937_64 rng(4);
  const auto x = random_vec(50, rng), y = random_vec(50, rng);
  EXPECT_EQ(cycle_loss(Span(x), Span(x), Span(y), Span(y)), 0.0);
  auto yc = y;
  for (auto& v : yc) v += 0.3;
  EXPECT_NEAR(cycle_loss(Span(x), Span(x), Span(y), Span(yc)), 0.3, 1e-15);
  const auto xr = random_vec(50, rng), yr = random_vec(50, rng);
  EXPECT_NEAR(cycle_loss(Span(x), Span(xr), Span(y), Span(yr)), recount_l1(x, xr) + recount_l1(y, yr), 1e-12);
  EXPECT_THROW(cycle_loss(Span(x), Span(xr.data(), 49), Span(y), Span(yr)), ContractError);
}

TEST(Adversarial, EquilibriumAndLimits) {
  const std::vector<double> half(8, 0.5);
  const auto t = adversarial_loss_terms(Span(half), Span(half));
  EXPECT_NEAR(t.discriminator, 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(t.generator, std::log(2.0), 1e-12);
  const std::vector<double> ones(4, 1.0), zeros(4, 0.0);
  const auto perfect = adversarial_loss_terms(Span(ones), Span(zeros));
  EXPECT_NEAR(perfect.discriminator, 0.0, 1e-6);
  EXPECT_NEAR(perfect.generator, -std::log(1e-7), 1e-9);
  EXPECT_TRUE(std::isfinite(adversarial_loss_terms(Span(zeros), Span(ones)).discriminator));
  EXPECT_THROW(adversarial_loss_terms(Span(), Span(half)), ContractError);
}

TEST(TotalLoss, Examples) {
  EXPECT_EQ(total_loss(0, 0, 0, 0), 0.0);
  EXPECT_EQ(total_loss(1, 1, 2, 3), 52.0);
  EXPECT_EQ(total_loss(1, 1, 2, 3, LossWeights{1.0, 0.0}), 4.0);
  EXPECT_THROW(total_loss(NAN, 0, 0, 0), ContractError);
  EXPECT_THROW(total_loss(0, 0, 0, 0, LossWeights{-1.0, 1.0}), ContractError);
}

TEST(TotalLoss, LinearInEachComponent) {
  const double base = total_loss(0.3, 0.4, 0.05, 0.02);
  EXPECT_NEAR(total_loss(0.3, 0.4, 0.06, 0.02) - base, 10 * 0.01, 1e-12);
  EXPECT_NEAR(total_loss(0.3, 0.4, 0.05, 0.03) - base, 10 * 0.01, 1e-12);
  EXPECT_NEAR(total_loss(0.5, 0.4, 0.05, 0.02) - base, 0.2, 1e-12);
}
