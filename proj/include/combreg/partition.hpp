#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "combreg/empdist.hpp"
#include "combreg/geometry.hpp"

namespace combreg {

/// One value of the common regressor. `numeric` is NaN for non-numeric labels.
struct CellInfo {
  std::string label;
  double numeric = 0.0;
};

/// Two unlinked samples: (y, x_c) and (x_nc, x_c). Cells are indices into
/// `cells`, which is ordered (numerically when every label is a number).
struct TwoSampleDataset {
  std::vector<double> y;
  std::vector<int> y_cell;
  Eigen::MatrixXd x;
  std::vector<int> x_cell;
  std::vector<CellInfo> cells;
  std::vector<std::string> covariate_names;

  std::size_t n_y() const { return y.size(); }
  std::size_t n_x() const { return static_cast<std::size_t>(x.rows()); }
  int dimension() const { return static_cast<int>(x.cols()); }
  /// n_X n_Y / (n_X + n_Y).
  double effective_n() const;

  /// Throws ValidationError when sizes disagree or a cell index is out of range.
  void validate() const;

  /// Dataset with a single common cell, i.e. no common regressor.
  static TwoSampleDataset without_common(std::vector<double> y, Eigen::MatrixXd x);

  /// Rows of each sample restricted to the given indices (used by subsampling).
  TwoSampleDataset subset(const std::vector<std::size_t>& y_rows, const std::vector<std::size_t>& x_rows) const;
};

/// Sorts cell labels numerically when all parse as numbers, else
/// lexicographically, and returns them with parsed values.
std::vector<CellInfo> order_cells(const std::vector<std::string>& labels);

struct ExcludedCell {
  std::string label;
  std::size_t n_y = 0;
  std::size_t n_x = 0;
  std::string reason;
};

/// Per-cell moments. Y moments use outcome-sample frequencies and X_nc
/// moments covariate-sample frequencies, each renormalized over retained cells.
struct ConditionalMoments {
  std::vector<double> m_y;
  std::vector<Eigen::VectorXd> m_x;
  std::vector<double> p_y;
  std::vector<double> p_x;
  /// sum_c p_x(c) V(X_nc | c).
  Eigen::MatrixXd pooled_within_cov;
  double var_y = 0.0;
  /// V(E(Y | X_c)) / V(Y).
  double r2_short = 0.0;
};

/// Within-cell residualized data. The radial function is the infimum over
/// retained cells of the per-cell radial functions.
class CellPartition : public RadialSource {
 public:
  struct Cell {
    int dataset_index = 0;
    CellInfo info;
    EmpiricalDist y;  // centered within the cell
    std::optional<SuperquantileCurve> y_curve;  // absent when Y is constant in the cell
    Eigen::MatrixXd x;  // raw X_nc rows of the cell
    std::size_t n_y = 0;
    std::size_t n_x = 0;
  };

  int dimension() const override { return dimension_; }

  /// S-bar(q): minimum over cells; `cell` in the result is the position of the
  /// minimizing cell in cells(). Cells where X_nc'q is constant impose no
  /// restriction; if that holds for every cell a ValidationError is thrown.
  RadialValue evaluate(const Eigen::VectorXd& q, double epsilon) const override;

  /// Radial value of a single retained cell (position in cells()).
  RadialValue evaluate_cell(std::size_t cell, const Eigen::VectorXd& q, double epsilon) const;

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<ExcludedCell>& excluded() const { return excluded_; }
  const ConditionalMoments& moments() const { return moments_; }
  double effective_n() const { return effective_n_; }

  friend CellPartition residualize(const TwoSampleDataset& data, std::size_t min_cell);

 private:
  CellPartition() = default;
  int dimension_ = 1;
  double effective_n_ = 0.0;
  std::vector<Cell> cells_;
  std::vector<ExcludedCell> excluded_;
  ConditionalMoments moments_;
};

/// Splits both samples by common-regressor cell and centers within cells.
/// Cells with fewer than `min_cell` rows in either sample are excluded and
/// recorded. Throws ValidationError when no cell is retained and
/// NumericalError when the pooled within-cell covariance is singular.
CellPartition residualize(const TwoSampleDataset& data, std::size_t min_cell = 10);

/// Identified values of f(x) = m_Y(x) - m_X(x)'beta over a beta set, and of
/// the dummy coefficients gamma(x) = f(x) - f(reference), the reference being
/// the first retained cell.
struct FSet {
  std::vector<std::string> cell_labels;
  std::vector<double> f_lower;
  std::vector<double> f_upper;
  std::vector<std::string> gamma_labels;
  std::vector<double> gamma_lower;
  std::vector<double> gamma_upper;
};

/// Evaluates f at the boundary points of every non-empty direction (the
/// origin included when some lower bound is 0). Throws ValidationError when
/// the set is empty or unbounded.
FSet f_set(const CellPartition& partition, const StarSet& beta_set);

/// Radial function of the (delta, beta) set for a model with an interaction
/// X_{1,c} * X_{nc,1}. Coordinate 0 of q is delta; each retained cell carries
/// its X_{1,c} value.
class InteractionSource : public RadialSource {
 public:
  /// Uses each cell's numeric label as its X_{1,c} value when `x1` is empty.
  /// Throws ValidationError when fewer than two distinct values are present.
  InteractionSource(const CellPartition& partition, std::vector<double> x1 = {});

  int dimension() const override { return partition_.dimension() + 1; }
  RadialValue evaluate(const Eigen::VectorXd& q, double epsilon) const override;

 private:
  const CellPartition& partition_;
  std::vector<double> x1_;
};

/// R^2 of Y on the common-regressor cells, from the outcome sample alone.
double short_r2(const TwoSampleDataset& data);

}  // namespace combreg
