#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lidarwx/physics.hpp"
#include "oracles.hpp"

using namespace lidarwx;

TEST(PhysicsIntensity, Examples) {
  EXPECT_EQ(physics_intensity(1.0, 0.0, 1.0), 1.0);
  EXPECT_NEAR(physics_intensity(0.5, std::numbers::pi / 2, 10.0), 0.0, 1e-17);
  EXPECT_NEAR(physics_intensity(0.8, std::numbers::pi / 3, 2.0), 0.2, 1e-15);
  EXPECT_THROW(physics_intensity(0.5, 0.0, 0.0), DomainError);
  EXPECT_THROW(physics_intensity(0.5, 0.0, -1.0), DomainError);
}

TEST(PhysicsIntensity, InverseRangeAndLinearInReflectance) {
  for (double r = 0.5; r < 100.0; r *= 1.7) {
    EXPECT_NEAR(physics_intensity(0.4, 0.3, 2 * r) * 2, physics_intensity(0.4, 0.3, r), 1e-15);
    EXPECT_NEAR(physics_intensity(0.2, 0.3, r) * 2, physics_intensity(0.4, 0.3, r), 1e-15);
  }
}

TEST(DeriveAlpha, Examples) {
  EXPECT_EQ(derive_alpha(0.0), 0.0);
  EXPECT_EQ(derive_alpha(1.0), 1.45);
  EXPECT_NEAR(derive_alpha(30.0), 12.785732242888836, 1e-12);
  EXPECT_THROW(derive_alpha(-1.0), DomainError);
}

TEST(DeriveAlpha, Monotone) {
  double prev = 0.0;
  for (double r = 0.1; r <= 100.0; r += 0.1) {
    const double a = derive_alpha(r);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(Attenuate, Examples) {
  for (double R : {0.0, 1.0, 57.3, 1e4}) EXPECT_EQ(attenuate(0.37, 0.0, R), 0.37);
  EXPECT_EQ(attenuate(0.0, 5.0, 30.0), 0.0);
  EXPECT_NEAR(attenuate(1.0, 2.0, 500.0), std::exp(-2.0), 1e-15);
  // scale converts range units: 0.5 km with scale 1 equals 500 m with scale 1000
  EXPECT_DOUBLE_EQ(attenuate(1.0, 2.0, 0.5, 1.0), attenuate(1.0, 2.0, 500.0));
}

TEST(Attenuate, DoublingRangeRatio) {
  const double alpha = derive_alpha(30.0);
  for (int k = 1; k <= 100; ++k) {
    const double R = 0.8 * k;
    const double i1 = attenuate(physics_intensity(0.3, 0.2, R), alpha, R);
    const double i2 = attenuate(physics_intensity(0.3, 0.2, 2 * R), alpha, 2 * R);
    const double expect = 0.5 * std::exp(-2.0 * alpha * R / 1000.0);
    EXPECT_LE(std::fabs(i2 / i1 - expect), 1e-12 * expect) << "R=" << R;
  }
}

TEST(AttenuatePath, HomogeneousReduction) {
  const std::vector<AlphaSegment> prof{{0.0, 80.0, 3.2}};
  EXPECT_DOUBLE_EQ(attenuate_path(0.6, prof), attenuate(0.6, 3.2, 80.0));
}

TEST(AttenuatePath, ClearPrefixDoesNotCount) {
  const std::vector<AlphaSegment> a{{0.0, 20.0, 0.0}, {20.0, 50.0, 4.0}};
  const std::vector<AlphaSegment> b{{0.0, 70.0, 0.0}, {70.0, 100.0, 4.0}};
  EXPECT_DOUBLE_EQ(attenuate_path(1.0, a), attenuate_path(1.0, b));
  EXPECT_DOUBLE_EQ(attenuate_path(1.0, a), attenuate(1.0, 4.0, 30.0));
}

TEST(AttenuatePath, MalformedProfiles) {
  const std::vector<AlphaSegment> gap{{0.0, 10.0, 1.0}, {11.0, 20.0, 1.0}};
  const std::vector<AlphaSegment> overlap{{0.0, 10.0, 1.0}, {9.0, 20.0, 1.0}};
  const std::vector<AlphaSegment> late{{1.0, 10.0, 1.0}};
  const std::vector<AlphaSegment> empty_seg{{0.0, 0.0, 1.0}};
  const std::vector<AlphaSegment> negative{{0.0, 5.0, -1.0}};
  EXPECT_THROW(attenuate_path(1.0, gap), ContractError);
  EXPECT_THROW(attenuate_path(1.0, overlap), ContractError);
  EXPECT_THROW(attenuate_path(1.0, late), ContractError);
  EXPECT_THROW(attenuate_path(1.0, empty_seg), ContractError);
  EXPECT_THROW(attenuate_path(1.0, negative), ContractError);
  EXPECT_THROW(attenuate_path(1.0, std::vector<AlphaSegment>{}), ContractError);
}

TEST(AttenuatePath, RandomProfileMatchesQuadrature) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> len(1.0, 15.0), a(0.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AlphaSegment> prof;
    double s = 0.0;
    for (int j = 0; j < 10; ++j) {
      const double e = s + len(rng);
      prof.push_back({s, e, a(rng)});
      s = e;
    }
    const double got = attenuate_path(1.0, prof);
    const double want = oracle::attenuation_quadrature(prof, 1000.0, 100000);
    EXPECT_LE(std::fabs(got - want), 1e-9 * want);
  }
}

TEST(AttenuatePath, RefinementConvergesToHomogeneous) {
  // splitting a constant profile into more pieces must not change the answer
  const double ref = attenuate(0.9, 7.5, 64.0);
  for (int n : {1, 2, 5, 16, 64}) {
    std::vector<AlphaSegment> prof;
    for (int j = 0; j < n; ++j) prof.push_back({64.0 * j / n, 64.0 * (j + 1) / n, 7.5});
    EXPECT_LE(std::fabs(attenuate_path(0.9, prof) - ref), 1e-12 * ref) << n;
  }
}

TEST(WeatherParamsTest, AlphaSources) {
  WeatherParams w;
  EXPECT_NEAR(w.alpha(), 12.785732242888836, 1e-12);
  w.alpha_override = 3.0;
  EXPECT_EQ(w.alpha(), 3.0);
  w.condition = Condition::clear;
  EXPECT_EQ(w.alpha(), 0.0);
  w.condition = Condition::rain;
  w.alpha_override = -1.0;
  EXPECT_THROW(w.validate(), DomainError);
  w.alpha_override.reset();
  w.rain_rate = -2.0;
  EXPECT_THROW(w.validate(), DomainError);
}

TEST(ConditionNames, RoundTrip) {
  for (auto c : {Condition::clear, Condition::rain, Condition::snow}) EXPECT_EQ(parse_condition(to_string(c)), c);
  EXPECT_THROW(parse_condition("fog"), Error);
}

TEST(PhysicsTarget, ClearEqualsNormalizedLambertian) {
  const std::vector<double> rho{0.2, 0.5, 0.8}, th{0.0, 0.5, 1.0}, R{5.0, 10.0, 20.0};
  WeatherParams w;
  w.condition = Condition::clear;
  const auto t = physics_target_frame(rho, th, R, w);
  double mx = 0;
  for (int i = 0; i < 3; ++i) mx = std::max(mx, rho[i] * std::cos(th[i]) / R[i]);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(t.normalized[i], rho[i] * std::cos(th[i]) / R[i] / mx, 1e-15);
  EXPECT_TRUE(t.normalized_applied);
  EXPECT_NEAR(t.max, mx, 1e-18);
}

TEST(PhysicsTarget, DoublingRatioAfterNormalization) {
  const std::vector<double> rho{0.4, 0.4}, th{0.3, 0.3}, R{25.0, 50.0};
  WeatherParams w;
  const auto t = physics_target_frame(rho, th, R, w);
  const double expect = 0.5 * std::exp(-2.0 * w.alpha() * 25.0 / 1000.0);
  EXPECT_NEAR(t.normalized[1] / t.normalized[0], expect, 1e-12);
  EXPECT_EQ(t.normalized[0], 1.0);
}

TEST(PhysicsTarget, MonotoneInRangeAndMaskedEntries) {
  std::vector<double> rho(50, 0.3), th(50, 0.1), R(50);
  for (int i = 0; i < 50; ++i) R[i] = 1.0 + 2.0 * i;
  std::vector<std::uint8_t> valid(50, 1);
  valid[10] = 0;
  const auto t = physics_target_frame(rho, th, R, WeatherParams{}, valid);
  EXPECT_EQ(t.raw[10], 0.0);
  for (int i = 1; i < 50; ++i) {
    if (i == 10 || i == 11) continue;
    EXPECT_LT(t.raw[i], t.raw[i - 1]);
  }
}

TEST(PhysicsTarget, AllZeroFrameWarns) {
  const std::vector<double> rho{0.0, 0.0}, th{0.0, 0.0}, R{1.0, 2.0};
  const auto t = physics_target_frame(rho, th, R, WeatherParams{});
  EXPECT_FALSE(t.normalized_applied);
  EXPECT_EQ(t.max, 0.0);
  EXPECT_EQ(t.warnings.size(), 1u);
  EXPECT_THROW(physics_target_frame(rho, th, std::vector<double>{1.0}, WeatherParams{}), ContractError);
}
