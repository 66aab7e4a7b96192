#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "combreg/errors.hpp"
#include "combreg/radial.hpp"
#include "test_support.hpp"

using namespace combreg;

namespace {

EmpiricalDist centered(const std::vector<double>& s) { return EmpiricalDist::from_sample(s).centered(); }

struct Pair {
  EmpiricalDist f;
  EmpiricalDist g;
};

Pair random_pair(std::uint64_t seed, std::uint64_t index) {
  auto rng = make_stream(seed, index);
  const auto a = gen::mixed_sample(rng, gen::small_size(rng));
  const auto b = gen::mixed_sample(rng, gen::small_size(rng));
  return {centered(a), centered(b)};
}

}  // namespace

TEST(RatioR, IdenticalCurves) {
  const SuperquantileCurve c(centered({-1.0, 0.5, 3.0, 2.0}));
  for (double a : {0.1, 0.3, 0.5, 0.9}) EXPECT_NEAR(ratio_r(a, c, c), 1.0, 1e-15);
}

TEST(RatioR, TwoPointHandValues) {
  const SuperquantileCurve y(centered({-1, 1}));
  const SuperquantileCurve x(centered({-2, 2}));
  EXPECT_NEAR(ratio_r(0.25, y, x), 0.5, 1e-15);
  EXPECT_NEAR(ratio_r(0.75, y, x), 0.5, 1e-15);
  EXPECT_THROW(ratio_r(0.0, y, x), ValidationError);
  EXPECT_THROW(ratio_r(1.0, y, x), ValidationError);
}

TEST(SEpsilon, ConstantRatio) {
  const SuperquantileCurve y(centered({-1, 1}));
  const SuperquantileCurve x(centered({-2, 2}));
  for (double e : {0.01, 0.2, 0.5}) {
    const auto r = s_epsilon(y, x, e);
    EXPECT_NEAR(r.value, 0.5, 1e-15);
    EXPECT_EQ(r.argmin_alpha, e);  // ties go to the smallest alpha
  }
  EXPECT_NEAR(s_epsilon(y, y, 0.1).value, 1.0, 1e-15);
  EXPECT_THROW(s_epsilon(y, x, 0.0), ValidationError);
  EXPECT_THROW(s_epsilon(y, x, 0.6), ValidationError);
}

TEST(SEpsilon, ValueEqualsRatioAtArgmin) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto p = random_pair(21, t);
    const SuperquantileCurve f(p.f), g(p.g);
    for (double e : {0.005, 0.05, 0.25, 0.5}) {
      const auto r = s_epsilon(f, g, e);
      EXPECT_GE(r.argmin_alpha, e);
      EXPECT_LE(r.argmin_alpha, 1.0 - e);
      EXPECT_NEAR(r.value, ratio_r(r.argmin_alpha, f, g), 1e-12 * std::max(1.0, r.value));
    }
  }
}

TEST(SEpsilon, KnotMinimumBelowDenseGrid) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto p = random_pair(22, t);
    const SuperquantileCurve f(p.f), g(p.g);
    const double e = 0.01;
    const auto r = s_epsilon(f, g, e);
    double grid_min = INFINITY;
    double max_step = 0.0;
    double prev = NAN;
    const int m = 10000;
    for (int i = 0; i < m; ++i) {
      const double a = e + (1.0 - 2.0 * e) * i / (m - 1);
      const double v = ratio_r(a, f, g);
      grid_min = std::min(grid_min, v);
      if (i > 0) max_step = std::max(max_step, std::abs(v - prev));
      prev = v;
    }
    EXPECT_LE(r.value, grid_min + 1e-12);
    // The true minimizer lies within one grid spacing of a grid point.
    EXPECT_LE(grid_min - r.value, 2.0 * max_step + 1e-12);
  }
}

TEST(SEpsilon, MonotoneInEpsilon) {
  const std::vector<double> grid{0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.45};
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto p = random_pair(23, t);
    const SuperquantileCurve f(p.f), g(p.g);
    double prev = 0.0;
    for (double e : grid) {
      const double v = s_epsilon(f, g, e).value;
      EXPECT_GE(v, prev * (1.0 - 1e-12));
      prev = v;
    }
    EXPECT_LE(s_unregularized(f, g).value, s_epsilon(f, g, grid.front()).value * (1.0 + 1e-12));
  }
}

TEST(SEpsilon, ScaleEquivariance) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto p = random_pair(24, t);
    const SuperquantileCurve f(p.f), g(p.g);
    const SuperquantileCurve g3(p.g.scaled(3.0));
    const double a = s_epsilon(f, g, 0.05).value;
    EXPECT_NEAR(s_epsilon(f, g3, 0.05).value, a / 3.0, 1e-12 * a);
  }
}

TEST(SUnregularized, LimitsMatchTailRatios) {
  const SuperquantileCurve y(centered({-1, 0, 4}));
  const SuperquantileCurve x(centered({-1, 1}));
  // Tail limits: lower (5/3)/1, upper (8/3)/1; interior knots give the rest.
  const auto r = s_unregularized(y, x);
  double manual = std::min(5.0 / 3.0, 8.0 / 3.0);
  for (double a : {1.0 / 3.0, 0.5, 2.0 / 3.0}) manual = std::min(manual, ratio_r(a, y, x));
  EXPECT_NEAR(r.value, manual, 1e-14);
}

TEST(Dominance, Examples) {
  const auto y = centered({-1, 1});
  EXPECT_TRUE(dominance_check(y, y));
  EXPECT_TRUE(dominance_check(y, centered({-0.6, 0.6})));
  EXPECT_FALSE(dominance_check(y, centered({-1.2, 1.2})));
}

TEST(Bisection, Examples) {
  const auto y = centered({-1, 1});
  const auto x = centered({-2, 2});
  EXPECT_NEAR(s_oracle_bisection(y, x, 1e-10), 0.5, 1e-10);
  EXPECT_NEAR(s_oracle_bisection(y, y, 1e-10), 1.0, 1e-10);
  EXPECT_THROW(s_oracle_bisection(y, x, 0.0), ValidationError);
}

TEST(Bisection, AgreesWithKnotEnumeration) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    const auto p = random_pair(25, t);
    const double oracle = s_oracle_bisection(p.f, p.g, 1e-11);
    const double knots = s_unregularized(SuperquantileCurve(p.f), SuperquantileCurve(p.g)).value;
    EXPECT_NEAR(oracle, knots, 1e-9 * std::max(1.0, knots)) << "instance " << t;
  }
}

TEST(Bisection, DominanceFlipsAtOracle) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    const auto p = random_pair(26, t);
    const double s = s_oracle_bisection(p.f, p.g, 1e-11);
    auto rng = make_stream(27, t);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 5; ++k) {
      const double lam = u(rng) * s;
      if (std::abs(lam - s) <= 1e-9 * std::max(1.0, s)) continue;
      EXPECT_EQ(dominance_check(p.f, p.g.scaled(lam)), lam < s) << "instance " << t << " lambda " << lam;
    }
  }
}

TEST(SEpsilon, GaussianLargeSample) {
  auto rng = make_stream(28, 0);
  std::normal_distribution<double> n(0.0, 1.0);
  const int size = 20000;
  std::vector<double> x(size), y(size);
  for (auto& v : x) v = 1.5 * n(rng);
  for (auto& v : y) v = 1.5 * n(rng) + n(rng);
  const SuperquantileCurve f(centered(y)), g(centered(x));
  EXPECT_NEAR(s_epsilon(f, g, 0.25).value, std::sqrt(3.25 / 2.25), 0.04);
}
