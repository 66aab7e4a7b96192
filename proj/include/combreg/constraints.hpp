#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "combreg/geometry.hpp"
#include "combreg/partition.hpp"

namespace combreg {

enum class RowKind { monotone, convex, exclusion, custom, sign };

const char* to_string(RowKind kind);

/// One linear restriction [R f](r) >= lower_bound, with f given by its
/// values on the retained cells (in partition order).
struct ShapeRow {
  std::vector<double> coef;
  double lower_bound = 0.0;
  RowKind kind = RowKind::custom;
};

struct ShapeOperator {
  std::vector<ShapeRow> rows;
  bool empty() const { return rows.empty(); }
};

enum class ShapeKind { monotone, convex, exclusion };

/// monotone: K-1 increasing-difference rows. convex: K-2 divided second
/// differences (spacing from numeric cell values, unit spacing otherwise).
/// exclusion(cbar): |f(x_{r+1}) - f(x_r)| <= cbar for consecutive cells.
/// Throws ValidationError when there are too few cells.
ShapeOperator build_shape_operator(ShapeKind kind, const std::vector<CellInfo>& cells, double cbar = 0.0);

struct ShapeBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  /// Some row had a = b = 0 exactly.
  bool knife_edge = false;
};

/// Interval of lambda such that beta = lambda q satisfies every row.
/// Row r gives a - lambda b >= 0 with a = [R m_Y - c](r), b = [R m_X' q](r).
/// An infeasible row with b = 0 yields lower = +inf, upper = -inf.
ShapeBounds shape_bounds(const ConditionalMoments& moments, const ShapeOperator& op, const Eigen::VectorXd& q);

struct R2Bound {
  double value = 0.0;
  /// Requested bound is below the short-regression R^2 and was clamped.
  bool clamped = false;
};

/// sqrt(max(0, r2_lower - R2_s) V(Y) / q'E(V(X_nc|X_c))q).
/// Throws NumericalError when the quadratic form is not positive.
R2Bound r2_lower_bound(const ConditionalMoments& moments, double r2_lower, const Eigen::VectorXd& q);

/// Sign requirement on a coefficient: +1 means >= 0, -1 means <= 0.
struct SignSpec {
  std::map<int, int> beta;  // 0-based component -> sign
  std::map<std::string, int> gamma;  // cell label -> sign of f(cell) - f(reference)
};

struct ConstraintSpec {
  std::optional<ShapeKind> shape;
  double exclusion_cbar = 0.0;
  /// Custom rows as (cell label -> coefficient, lower bound).
  std::vector<std::pair<std::map<std::string, double>, double>> custom_rows;
  std::optional<double> r2_lower;
  std::optional<double> r2_relative;
  SignSpec signs;

  bool empty() const;

  /// Parses {"shape": "monotone"|"convex"|{"exclusion": c}|[{"coef": {...}, "lower": c}],
  ///         "r2_lower": number | {"relative": r}, "signs": {"beta1": "+", "gamma:<label>": "-", "gamma": "+"}}.
  static ConstraintSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Shape rows (including those generated by gamma sign restrictions) over
/// the partition's retained cells.
ShapeOperator shape_rows(const ConstraintSpec& spec, const CellPartition& partition);

/// The absolute R^2 bound implied by the constraints, if any.
std::optional<double> effective_r2_lower(const ConstraintSpec& spec, const ConditionalMoments& moments);

/// Per-direction constrained bounds before intersecting with the radial upper bound.
struct DirectionBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool knife_edge = false;
  bool r2_clamped = false;
};

DirectionBounds constraint_bounds(const ConstraintSpec& spec, const ShapeOperator& op, const CellPartition& partition,
                                  const Eigen::VectorXd& q);

/// Intersects `base` with the constraint bounds: lower = max of the lower
/// bounds (and 0), upper = min of the upper bounds; directions with
/// lower > upper are marked empty.
StarSet combine(const StarSet& base, const std::vector<DirectionBounds>& bounds);

struct ConstrainedSet {
  StarSet set;
  std::vector<std::string> warnings;
};

/// Radial set of the partition intersected with the constraints.
ConstrainedSet constrained_set(const CellPartition& partition, const ConstraintSpec& spec,
                               const std::vector<Eigen::VectorXd>& directions, double epsilon);

}  // namespace combreg
