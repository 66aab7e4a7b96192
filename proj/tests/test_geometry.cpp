#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "combreg/errors.hpp"
#include "combreg/geometry.hpp"
#include "test_support.hpp"

using namespace combreg;

namespace {

// Y = X'beta + U with X ~ N(0, sigma), U ~ N(0, su^2), drawn as two independent samples.
struct GaussianPair {
  std::vector<double> y;
  Eigen::MatrixXd x;
};

GaussianPair gaussian_pair(std::uint64_t seed, int n, const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta,
                           double su) {
  auto rng = make_stream(seed, 0);
  const Eigen::MatrixXd l = sigma.llt().matrixL();
  const auto p = sigma.rows();
  GaussianPair out;
  out.x = gen::gaussian_matrix(rng, n, p) * l.transpose();
  const Eigen::MatrixXd xy = gen::gaussian_matrix(rng, n, p) * l.transpose();
  std::normal_distribution<double> nu(0.0, su);
  out.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.y[static_cast<std::size_t>(i)] = xy.row(i).dot(beta) + nu(rng);
  return out;
}

}  // namespace

TEST(SphereGrid, OneDimension) {
  const auto g = sphere_grid(1, 17);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0][0], -1.0);
  EXPECT_EQ(g[1][0], 1.0);
}

TEST(SphereGrid, TwoDimensionsEqualAngles) {
  const auto g = sphere_grid(2, 4);
  ASSERT_EQ(g.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::atan2(g[i][1], g[i][0]), std::remainder(i * std::numbers::pi / 2, 2 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(g[i].norm(), 1.0, 1e-15);
  }
}

TEST(SphereGrid, HigherDimensionsUnitNorm) {
  for (int p : {3, 4, 6}) {
    const auto g = sphere_grid(p, 100);
    ASSERT_EQ(g.size(), 100u);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& q : g) {
      EXPECT_NEAR(q.norm(), 1.0, 1e-12);
      mean += q / 100.0;
    }
    EXPECT_LT(mean.norm(), 0.25);  // roughly balanced over the sphere
  }
  EXPECT_THROW(sphere_grid(0, 10), ValidationError);
}

TEST(Ellipsoid, OneDimensionalRadius) {
  const Ellipsoid e(Eigen::MatrixXd::Constant(1, 1, 2.25), 3.25);
  EXPECT_NEAR(e.radius(Eigen::VectorXd::Constant(1, 1.0)), 1.20185, 1e-5);
  const Ellipsoid unit(Eigen::MatrixXd::Constant(1, 1, 4.0), 4.0);
  EXPECT_NEAR(unit.radius(Eigen::VectorXd::Constant(1, -1.0)), 1.0, 1e-15);
}

TEST(Ellipsoid, SupportAlongAxis) {
  Eigen::MatrixXd s(2, 2);
  s << 1, -0.2, -0.2, 1;
  const Ellipsoid e(s, 5.6);
  EXPECT_NEAR(e.support(Eigen::Vector2d(1, 0)), 2.4152, 1e-4);
  // Support equals the max of q_1 * radius(q) over a dense circle.
  double best = 0.0;
  for (const auto& q : sphere_grid(2, 20000)) best = std::max(best, q[0] * e.radius(q));
  EXPECT_NEAR(best, e.support(Eigen::Vector2d(1, 0)), 1e-6);
  EXPECT_THROW(Ellipsoid(Eigen::MatrixXd::Zero(2, 2), 1.0), NumericalError);
}

TEST(RadialProblem, IdentityRegression) {
  auto rng = make_stream(31, 0);
  const Eigen::MatrixXd x = gen::gaussian_matrix(rng, 200, 1);
  const std::vector<double> y(x.data(), x.data() + x.size());
  const RadialProblem prob(y, x);
  EXPECT_NEAR(prob.evaluate(Eigen::VectorXd::Constant(1, 1.0), 0.1).value, 1.0, 1e-12);
}

TEST(RadialProblem, RejectsSingularCovariates) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;
  EXPECT_THROW(RadialProblem(std::vector<double>{1, 2, 3, 5}, x), NumericalError);
}

TEST(RadialSet, LowerZeroAndHullContainsBoundary) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1, -0.2, -0.2, 1;
  const auto d = gaussian_pair(32, 2000, sigma, Eigen::Vector2d(1, 1), 2.0);
  const RadialProblem prob(d.y, d.x);
  const auto set = radial_set(prob, sphere_grid(2, 200), 0.1);
  ASSERT_EQ(set.size(), 200u);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(set.lower[i], 0.0);
    EXPECT_GT(set.upper[i], 0.0);
    EXPECT_TRUE(std::isfinite(set.upper[i]));
  }
  ASSERT_GE(set.hull_vertices.size(), 3u);
  const auto& h = set.hull_vertices;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Vector2d pt = set.upper[i] * Eigen::Vector2d(set.directions[i][0], set.directions[i][1]);
    for (std::size_t j = 0; j < h.size(); ++j) {
      const auto& a = h[j];
      const auto& b = h[(j + 1) % h.size()];
      const double cr = (b.x() - a.x()) * (pt.y() - a.y()) - (b.y() - a.y()) * (pt.x() - a.x());
      EXPECT_GE(cr, -1e-9);
    }
  }
}

TEST(ConvexHull, SquareWithInteriorPoints) {
  std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}, {0.5, 0}};
  const auto h = convex_hull_2d(pts);
  ASSERT_EQ(h.size(), 4u);
  double area = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  EXPECT_NEAR(area / 2.0, 1.0, 1e-15);  // positive: counter-clockwise
}

TEST(SupportFunction, OneDimensionalReduction) {
  auto rng = make_stream(33, 0);
  const Eigen::MatrixXd x = gen::gaussian_matrix(rng, 300, 1);
  std::vector<double> y(300);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : y) v = n(rng);
  const RadialProblem prob(y, x);
  const auto up = support_function(prob, 0, 1, 0.05);
  EXPECT_EQ(up.value, prob.evaluate(Eigen::VectorXd::Constant(1, 1.0), 0.05).value);
  const auto iv = projection_interval(prob, 0, 0.05);
  EXPECT_EQ(iv.lower, -prob.evaluate(Eigen::VectorXd::Constant(1, -1.0), 0.05).value);
  EXPECT_LE(iv.lower, 0.0);
  EXPECT_GE(iv.upper, 0.0);
}

TEST(SupportFunction, DominatesDenseGridProjections) {
  for (std::uint64_t seed : {34u, 35u, 36u}) {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1, 0.3, 0.3, 2;
    const auto d = gaussian_pair(seed, 400, sigma, Eigen::Vector2d(0.5, -1), 1.0);
    const RadialProblem prob(d.y, d.x);
    const double eps = 0.05;
    for (int k = 0; k < 2; ++k) {
      for (int sign : {1, -1}) {
        const auto sv = support_function(prob, k, sign, eps);
        double grid_best = 0.0;
        for (const auto& q : sphere_grid(2, 500)) {
          grid_best = std::max(grid_best, sign * q[k] * prob.evaluate(q, eps).value);
        }
        EXPECT_GE(sv.value, grid_best - 1e-6) << "seed " << seed << " k " << k << " sign " << sign;
        const Eigen::VectorXd& m = sv.minimizer;
        EXPECT_EQ(m[k], sign);
        EXPECT_NEAR(sv.value, prob.evaluate(m, eps).value, 1e-12 * sv.value);
      }
    }
  }
}

TEST(SupportFunction, MatchesGridProjectionAtModerateSize) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1, -0.2, -0.2, 1;
  const auto d = gaussian_pair(37, 5000, sigma, Eigen::Vector2d(1, 1), 2.0);
  const RadialProblem prob(d.y, d.x);
  const auto set = radial_set(prob, sphere_grid(2, 1000), 0.1);
  double grid_hi = 0.0, grid_lo = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    grid_hi = std::max(grid_hi, set.upper[i] * set.directions[i][0]);
    grid_lo = std::min(grid_lo, set.upper[i] * set.directions[i][0]);
  }
  const auto iv = projection_interval(prob, 0, 0.1);
  EXPECT_NEAR(iv.upper, grid_hi, 1e-2);
  EXPECT_NEAR(iv.lower, grid_lo, 1e-2);
}

TEST(RadialSet, GaussianCloseToEllipsoid) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1, -0.2, -0.2, 1;
  const auto d = gaussian_pair(38, 100000, sigma, Eigen::Vector2d(1, 1), 2.0);
  const RadialProblem prob(d.y, d.x);
  const Ellipsoid ell = variance_ellipsoid(d.y, d.x);
  const auto dirs = sphere_grid(2, 24);
  const auto set = radial_set(prob, dirs, 0.25);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    EXPECT_NEAR(set.upper[i] / ell.radius(dirs[i]), 1.0, 0.03) << "direction " << i;
  }
}

TEST(RadialSet, MidpointConvexityOfGauge) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto rng = make_stream(39, t);
    const Eigen::MatrixXd x = gen::gaussian_matrix(rng, 25, 2);
    const auto y = gen::mixed_sample(rng, 25);
    const RadialProblem prob(y, x);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
      const Eigen::Vector2d q1(1.0, n(rng));
      const Eigen::Vector2d q2(1.0, n(rng));
      const double g1 = 1.0 / prob.evaluate(q1, 0.05).value;
      const double g2 = 1.0 / prob.evaluate(q2, 0.05).value;
      const double gm = 1.0 / prob.evaluate(0.5 * (q1 + q2), 0.05).value;
      EXPECT_LE(gm, 0.5 * (g1 + g2) + 1e-9);
    }
  }
}
