#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "combreg/empdist.hpp"
#include "combreg/errors.hpp"
#include "test_support.hpp"

using namespace combreg;

namespace {

double naive_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

TEST(EmpiricalDist, MergesTies) {
  const std::vector<double> s{1, 1, 2};
  const auto d = EmpiricalDist::from_sample(s);
  ASSERT_EQ(d.support_size(), 2u);
  EXPECT_EQ(d.values()[0], 1.0);
  EXPECT_EQ(d.values()[1], 2.0);
  EXPECT_NEAR(d.weights()[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.weights()[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.mean(), 4.0 / 3.0, 1e-15);
  EXPECT_EQ(d.count(), 3u);
}

TEST(EmpiricalDist, Singleton) {
  const std::vector<double> s{5};
  const auto d = EmpiricalDist::from_sample(s);
  EXPECT_EQ(d.values(), std::vector<double>{5.0});
  EXPECT_EQ(d.weights(), std::vector<double>{1.0});
  EXPECT_EQ(d.mean(), 5.0);
  EXPECT_TRUE(d.degenerate());
}

TEST(EmpiricalDist, MeanMatchesNaiveSum) {
  auto rng = make_stream(11, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(10);
  for (auto& v : s) v = u(rng);
  const auto d = EmpiricalDist::from_sample(s);
  EXPECT_NEAR(d.mean(), naive_mean(s), 1e-12);
  double wsum = 0.0;
  for (double w : d.weights()) wsum += w;
  EXPECT_NEAR(wsum, 1.0, 1e-12);
}

TEST(EmpiricalDist, RejectsBadInput) {
  EXPECT_THROW(EmpiricalDist::from_sample(std::vector<double>{}), ValidationError);
  EXPECT_THROW(EmpiricalDist::from_sample(std::vector<double>{1.0, NAN}), ValidationError);
  EXPECT_THROW(EmpiricalDist::from_sample(std::vector<double>{1.0, INFINITY}), ValidationError);
  EXPECT_THROW(EmpiricalDist::from_weighted({2.0, 1.0}, {0.5, 0.5}), ValidationError);
  EXPECT_THROW(EmpiricalDist::from_weighted({1.0, 2.0}, {0.5, 0.0}), ValidationError);
}

TEST(EmpiricalDist, MeanDoesNotDependOnOrder) {
  auto rng = make_stream(12, 0);
  std::normal_distribution<double> n(3.0, 2.0);
  std::vector<double> s(500);
  for (auto& v : s) v = n(rng);
  const double m1 = EmpiricalDist::from_sample(s).mean();
  std::shuffle(s.begin(), s.end(), rng);
  EXPECT_EQ(EmpiricalDist::from_sample(s).mean(), m1);
}

TEST(Center, ShiftsByMean) {
  const auto c = EmpiricalDist::from_sample(std::vector<double>{1, 1, 2}).centered();
  EXPECT_NEAR(c.values()[0], -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.values()[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.mean(), 0.0);
}

TEST(Center, Idempotent) {
  const auto c = EmpiricalDist::from_sample(std::vector<double>{-1, 1}).centered();
  const auto cc = c.centered();
  EXPECT_EQ(c.values(), cc.values());
  EXPECT_EQ(c.weights(), cc.weights());
  EXPECT_EQ(cc.mean(), 0.0);
}

TEST(Center, GaussianSampleHasZeroMean) {
  auto rng = make_stream(13, 0);
  std::normal_distribution<double> n(10.0, 3.0);
  std::vector<double> s(1000);
  for (auto& v : s) v = n(rng);
  const auto c = EmpiricalDist::from_sample(s).centered();
  long double direct = 0.0L;
  for (std::size_t i = 0; i < c.support_size(); ++i) direct += static_cast<long double>(c.weights()[i]) * c.values()[i];
  EXPECT_LT(std::abs(static_cast<double>(direct)), 1e-12);
}

TEST(Quantile, StepFunction) {
  const auto d = EmpiricalDist::from_sample(std::vector<double>{1, 1, 2});
  EXPECT_EQ(d.quantile(0.5), 1.0);
  EXPECT_EQ(d.quantile(1.0), 2.0);
  EXPECT_EQ(d.quantile(2.0 / 3.0), 1.0);
  EXPECT_EQ(d.quantile(0.7), 2.0);
  EXPECT_THROW(d.quantile(0.0), ValidationError);
  EXPECT_THROW(d.quantile(1.5), ValidationError);
}

TEST(Quantile, InverseOfCdfAtSupportPoints) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    auto rng = make_stream(14, t);
    const auto s = gen::mixed_sample(rng, gen::small_size(rng));
    const auto d = EmpiricalDist::from_sample(s);
    for (double v : d.values()) EXPECT_EQ(d.quantile(d.cdf(v)), v);
  }
}

TEST(Quantile, RawSampleMatchesDist) {
  auto rng = make_stream(15, 0);
  const auto s = gen::mixed_sample(rng, 25);
  const auto d = EmpiricalDist::from_sample(s);
  for (double t : {0.01, 0.2, 0.5, 0.52, 0.8, 1.0}) EXPECT_EQ(sample_quantile(s, t), d.quantile(t));
}

TEST(SuperquantileCurve, TwoPointHandIntegration) {
  const auto d = EmpiricalDist::from_sample(std::vector<double>{-1, 1});
  const SuperquantileCurve c(d);
  EXPECT_NEAR(c(0.5), 0.5, 1e-15);
  EXPECT_NEAR(c(0.25), 0.25, 1e-15);
  EXPECT_NEAR(c(0.75), 0.25, 1e-15);
  EXPECT_EQ(c(0.0), 0.0);
  EXPECT_EQ(c(1.0), 0.0);
}

TEST(SuperquantileCurve, RejectsDegenerateAndUncentered) {
  EXPECT_THROW(SuperquantileCurve(EmpiricalDist::from_sample(std::vector<double>{3, 3})), ValidationError);
  EXPECT_THROW(SuperquantileCurve(EmpiricalDist::from_sample(std::vector<double>{1, 2})), ValidationError);
}

TEST(SuperquantileCurve, ConcavePositiveZeroAtEnds) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    auto rng = make_stream(16, t);
    const auto s = gen::mixed_sample(rng, gen::small_size(rng));
    const SuperquantileCurve c(EmpiricalDist::from_sample(s).centered());
    const auto& k = c.knots();
    const auto& v = c.curve_values();
    EXPECT_EQ(k.front(), 0.0);
    EXPECT_EQ(k.back(), 1.0);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_EQ(v.back(), 0.0);
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
      EXPECT_GT(v[i], 0.0);
      const double left = (v[i] - v[i - 1]) / (k[i] - k[i - 1]);
      const double right = (v[i + 1] - v[i]) / (k[i + 1] - k[i]);
      EXPECT_LE(right - left, 1e-12);
    }
  }
}

TEST(SuperquantileCurve, MatchesRiemannSumOfQuantile) {
  for (std::uint64_t t = 0; t < 5; ++t) {
    auto rng = make_stream(17, t);
    const auto s = gen::mixed_sample(rng, 12);
    const auto d = EmpiricalDist::from_sample(s).centered();
    const SuperquantileCurve c(d);
    const double range = d.max() - d.min();
    const double h = 1e-5;
    for (std::size_t i = 1; i + 1 < c.knots().size(); ++i) {
      const double alpha = c.knots()[i];
      double sum = 0.0;
      for (double u = alpha + 0.5 * h; u < 1.0; u += h) sum += d.quantile(u) * h;
      EXPECT_NEAR(c(alpha), sum, 2e-5 * range);
    }
  }
}
