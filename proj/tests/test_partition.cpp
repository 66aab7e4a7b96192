#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "combreg/errors.hpp"
#include "combreg/partition.hpp"
#include "test_support.hpp"

using namespace combreg;

namespace {

// Two-cell dataset with cell-specific location shifts.
TwoSampleDataset two_cells(std::uint64_t seed, int n, double y_shift1, double x_shift1) {
  auto rng = make_stream(seed, 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  TwoSampleDataset d;
  d.cells = {{"0", 0.0}, {"1", 1.0}};
  d.x.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    d.y.push_back(nd(rng) * (1.0 + c) + (c ? y_shift1 : 0.0));
    d.y_cell.push_back(c);
    d.x(i, 0) = nd(rng) * (1.0 + 0.5 * c) + (c ? x_shift1 : 0.0);
    d.x_cell.push_back(c);
  }
  d.covariate_names = {"x1"};
  return d;
}

}  // namespace

TEST(Residualize, SingleCellIsGlobalCentering) {
  auto rng = make_stream(41, 0);
  const Eigen::MatrixXd x = gen::gaussian_matrix(rng, 300, 2);
  const auto y = gen::mixed_sample(rng, 250);
  const auto d = TwoSampleDataset::without_common(y, x);
  const auto part = residualize(d);
  const RadialProblem plain(y, x);
  for (const auto& q : sphere_grid(2, 16)) {
    EXPECT_EQ(part.evaluate(q, 0.05).value, plain.evaluate(q, 0.05).value);
  }
  EXPECT_DOUBLE_EQ(d.effective_n(), 300.0 * 250.0 / 550.0);
}

TEST(Residualize, CellsCenteredWithinCell) {
  TwoSampleDataset d;
  d.cells = {{"a", NAN}, {"b", NAN}};
  d.y = {0, 2, 2, 4};
  d.y_cell = {0, 0, 1, 1};
  d.x = Eigen::MatrixXd(4, 1);
  d.x << 1, 2, 5, 7;
  d.x_cell = {0, 0, 1, 1};
  const auto part = residualize(d, 2);
  ASSERT_EQ(part.cells().size(), 2u);
  EXPECT_EQ(part.moments().m_y[0], 1.0);
  EXPECT_EQ(part.moments().m_y[1], 3.0);
  for (const auto& c : part.cells()) EXPECT_LT(std::abs(c.y.mean()), 1e-10);
  EXPECT_NEAR(part.moments().m_x[1][0], 6.0, 1e-15);
  EXPECT_NEAR(part.moments().pooled_within_cov(0, 0), 0.5 * 0.25 + 0.5 * 1.0, 1e-15);
}

TEST(Residualize, SmallAndOneSidedCellsExcluded) {
  auto d = two_cells(42, 200, 1.0, 1.0);
  d.cells.push_back({"2", 2.0});
  d.cells.push_back({"3", 3.0});
  for (int i = 0; i < 5; ++i) {
    d.y.push_back(1.0 * i);
    d.y_cell.push_back(2);
  }
  d.x.conservativeResize(d.x.rows() + 20, 1);
  for (int i = 0; i < 20; ++i) {
    d.x(d.x.rows() - 20 + i, 0) = i;
    d.x_cell.push_back(i < 10 ? 2 : 3);
  }
  const auto part = residualize(d, 10);
  EXPECT_EQ(part.cells().size(), 2u);
  ASSERT_EQ(part.excluded().size(), 2u);
  EXPECT_EQ(part.excluded()[0].label, "2");
  EXPECT_EQ(part.excluded()[1].label, "3");
  EXPECT_EQ(part.excluded()[1].n_y, 0u);
}

TEST(Residualize, NoCommonCellIsAnError) {
  TwoSampleDataset d;
  d.cells = {{"a", NAN}, {"b", NAN}};
  d.y = {0, 1, 2};
  d.y_cell = {0, 0, 0};
  d.x = Eigen::MatrixXd(3, 1);
  d.x << 1, 2, 3;
  d.x_cell = {1, 1, 1};
  EXPECT_THROW(residualize(d, 1), ValidationError);
}

TEST(SBar, MinimumOfCellValues) {
  const auto d = two_cells(43, 600, 2.0, -1.0);
  const auto part = residualize(d);
  // Oracle: rebuild each cell as its own problem.
  std::vector<std::unique_ptr<RadialProblem>> per_cell;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> y;
    std::vector<double> x;
    for (std::size_t i = 0; i < d.y.size(); ++i) if (d.y_cell[i] == c) y.push_back(d.y[i]);
    for (std::size_t i = 0; i < d.x_cell.size(); ++i) if (d.x_cell[i] == c) x.push_back(d.x(static_cast<Eigen::Index>(i), 0));
    per_cell.push_back(std::make_unique<RadialProblem>(y, Eigen::Map<Eigen::MatrixXd>(x.data(), static_cast<Eigen::Index>(x.size()), 1)));
  }
  for (double s : {-1.0, 1.0}) {
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, s);
    const double v0 = per_cell[0]->evaluate(q, 0.1).value;
    const double v1 = per_cell[1]->evaluate(q, 0.1).value;
    const auto r = part.evaluate(q, 0.1);
    EXPECT_EQ(r.value, std::min(v0, v1));
    EXPECT_EQ(r.cell, v0 <= v1 ? 0 : 1);
    EXPECT_LE(r.value, part.evaluate_cell(0, q, 0.1).value);
    EXPECT_LE(r.value, part.evaluate_cell(1, q, 0.1).value);
  }
}

TEST(FSet, ZeroCoefficientGivesOutcomeMeans) {
  const auto d = two_cells(44, 400, 1.5, 0.7);
  const auto part = residualize(d);
  StarSet zero;
  zero.dimension = 1;
  zero.directions = sphere_grid(1, 2);
  zero.lower = {0.0, 0.0};
  zero.upper = {0.0, 0.0};
  zero.epsilon = {0.1, 0.1};
  zero.empty = {false, false};
  const auto f = f_set(part, zero);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(f.f_lower[c], part.moments().m_y[c]);
    EXPECT_EQ(f.f_upper[c], part.moments().m_y[c]);
  }
}

TEST(FSet, HandArithmeticForBinaryCell) {
  const auto d = two_cells(45, 400, 1.5, 0.7);
  const auto part = residualize(d);
  const auto& m = part.moments();
  StarSet one;
  one.dimension = 1;
  one.directions = {Eigen::VectorXd::Constant(1, 1.0)};
  one.lower = {1.0};
  one.upper = {1.0};
  one.epsilon = {0.1};
  one.empty = {false};
  const auto f = f_set(part, one);
  const double f0 = m.m_y[0] - m.m_x[0][0];
  const double f1 = m.m_y[1] - m.m_x[1][0];
  EXPECT_NEAR(f.f_lower[0], f0, 1e-14);
  EXPECT_NEAR(f.f_upper[1], f1, 1e-14);
  ASSERT_EQ(f.gamma_labels.size(), 1u);
  EXPECT_NEAR(f.gamma_lower[0], f1 - f0, 1e-14);
  EXPECT_NEAR(f.gamma_upper[0], f1 - f0, 1e-14);
}

TEST(FSet, IntervalEndpointsFromBetaInterval) {
  const auto d = two_cells(46, 400, 1.5, 0.7);
  const auto part = residualize(d);
  const auto set = radial_set(part, sphere_grid(1, 2), 0.1);
  const auto f = f_set(part, set);
  const auto& m = part.moments();
  const double lo = -set.upper[0];
  const double hi = set.upper[1];
  const double dy = m.m_y[1] - m.m_y[0];
  const double dx = m.m_x[1][0] - m.m_x[0][0];
  EXPECT_NEAR(f.gamma_lower[0], std::min(dy - dx * lo, dy - dx * hi), 1e-12);
  EXPECT_NEAR(f.gamma_upper[0], std::max(dy - dx * lo, dy - dx * hi), 1e-12);
}

TEST(Interaction, NoDeltaComponentReducesToSBar) {
  auto rng = make_stream(47, 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  TwoSampleDataset d;
  d.cells = {{"0", 0.0}, {"1", 1.0}, {"2", 2.0}};
  d.x.resize(900, 2);
  for (int i = 0; i < 900; ++i) {
    d.y.push_back(nd(rng) + 0.3 * (i % 3));
    d.y_cell.push_back(i % 3);
    d.x(i, 0) = nd(rng);
    d.x(i, 1) = nd(rng) + 0.5 * d.x(i, 0);
    d.x_cell.push_back(i % 3);
  }
  const auto part = residualize(d);
  const InteractionSource inter(part);
  EXPECT_EQ(inter.dimension(), 3);
  for (const auto& q : sphere_grid(2, 12)) {
    Eigen::VectorXd full(3);
    full << 0.0, q[0], q[1];
    EXPECT_EQ(inter.evaluate(full, 0.1).value, part.evaluate(q, 0.1).value);
  }
  // Per-cell oracle with an explicit delta component.
  Eigen::VectorXd full(3);
  full << 0.4, 0.6, -0.2;
  double manual = INFINITY;
  for (std::size_t c = 0; c < 3; ++c) {
    Eigen::VectorXd shifted(2);
    shifted << 0.6 + 0.4 * static_cast<double>(c), -0.2;
    manual = std::min(manual, part.evaluate_cell(c, shifted, 0.1).value);
  }
  EXPECT_EQ(inter.evaluate(full, 0.1).value, manual);
}

TEST(Interaction, NeedsTwoSupportPoints) {
  auto rng = make_stream(48, 0);
  const Eigen::MatrixXd x = gen::gaussian_matrix(rng, 50, 1);
  const auto d = TwoSampleDataset::without_common(gen::mixed_sample(rng, 50), x);
  const auto part = residualize(d);
  EXPECT_THROW(InteractionSource(part, {1.0}), ValidationError);
}

TEST(ShortR2, ConstantCellIsZero) {
  auto rng = make_stream(49, 0);
  const auto d = TwoSampleDataset::without_common(gen::mixed_sample(rng, 40), gen::gaussian_matrix(rng, 40, 1));
  EXPECT_EQ(short_r2(d), 0.0);
}

TEST(ShortR2, FullyExplained) {
  TwoSampleDataset d;
  d.cells = {{"0", 0}, {"1", 1}};
  d.y = {-1, -1, 1, 1};
  d.y_cell = {0, 0, 1, 1};
  d.x = Eigen::MatrixXd::Zero(1, 1);
  d.x_cell = {0};
  EXPECT_NEAR(short_r2(d), 1.0, 1e-15);
}

TEST(OrderCells, NumericThenLexicographic) {
  const auto a = order_cells({"10", "2", "-1", "2"});
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].label, "-1");
  EXPECT_EQ(a[1].label, "2");
  EXPECT_EQ(a[2].label, "10");
  const auto b = order_cells({"north", "east", "2"});
  EXPECT_EQ(b[0].label, "2");
  EXPECT_EQ(b[1].label, "east");
  EXPECT_TRUE(std::isnan(b[1].numeric));
}
