#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "combreg/empdist.hpp"
#include "combreg/optimize.hpp"
#include "combreg/radial.hpp"

namespace combreg {

/// Deterministic directions on the unit sphere of R^dimension.
/// p=1: {-1, +1}. p=2: `count` equally spaced angles starting at 0.
/// p=3: Fibonacci lattice. p>=4: Halton points mapped through the normal
/// quantile and normalized.
std::vector<Eigen::VectorXd> sphere_grid(int dimension, int count);

/// 2 for p=1, 1000 for p=2, 2000 for p>=3.
int default_direction_count(int dimension);

/// Anything that yields a radial value S(q) for a (not necessarily unit)
/// direction q. Implementations satisfy S(c q) = S(q) / c for c > 0.
class RadialSource {
 public:
  virtual ~RadialSource() = default;
  virtual int dimension() const = 0;
  /// epsilon = 0 selects the untrimmed value with tail limits.
  virtual RadialValue evaluate(const Eigen::VectorXd& q, double epsilon) const = 0;
};

/// The no-common-regressor problem: an outcome sample and a covariate sample.
class RadialProblem : public RadialSource {
 public:
  /// Throws ValidationError on empty or degenerate samples and NumericalError
  /// when the covariate sample covariance is singular.
  RadialProblem(std::span<const double> y, Eigen::MatrixXd x);

  int dimension() const override { return static_cast<int>(x_.cols()); }
  RadialValue evaluate(const Eigen::VectorXd& q, double epsilon) const override;

  /// Centered distribution of X'q. Projects raw rows and centers afterwards,
  /// so the result does not depend on row order.
  EmpiricalDist projected(const Eigen::VectorXd& q) const;

  const EmpiricalDist& outcome() const { return y_; }
  const SuperquantileCurve& outcome_curve() const { return y_curve_; }
  const Eigen::MatrixXd& covariates() const { return x_; }

 private:
  EmpiricalDist y_;
  SuperquantileCurve y_curve_;
  Eigen::MatrixXd x_;
};

/// S for the distributions F (outcome) and X'q (projection); epsilon 0 means untrimmed.
RadialValue radial_value(const SuperquantileCurve& outcome, const EmpiricalDist& projection, double epsilon);

/// Per-direction interval description of a star-shaped set
/// {lambda q : lower(q) <= lambda <= upper(q)}.
struct StarSet {
  int dimension = 1;
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> epsilon;
  std::vector<bool> empty;
  /// Counter-clockwise convex hull of the boundary points, p=2 only.
  std::vector<Eigen::Vector2d> hull_vertices;

  std::size_t size() const { return directions.size(); }
  bool all_empty() const;
  /// Recomputes hull_vertices from the finite boundary points of non-empty directions.
  void compute_hull();
};

/// Upper bound S_epsilon(q) per direction, lower bound 0, hull for p=2.
StarSet radial_set(const RadialSource& source, const std::vector<Eigen::VectorXd>& directions,
                   double epsilon);
/// Same with one epsilon per direction.
StarSet radial_set(const RadialSource& source, const std::vector<Eigen::VectorXd>& directions,
                   const std::vector<double>& epsilons);

/// Counter-clockwise convex hull (no collinear points) by quickhull.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points);

/// {b : b' shape b <= radius_sq}.
class Ellipsoid {
 public:
  Ellipsoid(Eigen::MatrixXd shape, double radius_sq);

  const Eigen::MatrixXd& shape() const { return shape_; }
  double radius_sq() const { return radius_sq_; }
  /// Radial function sqrt(radius_sq / q' shape q).
  double radius(const Eigen::VectorXd& q) const;
  bool contains(const Eigen::VectorXd& b, double slack = 0.0) const;
  /// sup{e'b : b in the ellipsoid} = sqrt(radius_sq e' shape^{-1} e).
  double support(const Eigen::VectorXd& e) const;

 private:
  Eigen::MatrixXd shape_;
  Eigen::MatrixXd inverse_;
  double radius_sq_;
};

/// The variance ellipsoid {b : b' V(X) b <= V(Y)} with plug-in (1/n) moments.
Ellipsoid variance_ellipsoid(std::span<const double> y, const Eigen::MatrixXd& x);

/// Sample covariance with 1/n normalization.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

struct SupportValue {
  int component_index = 0;
  int sign = 1;
  double value = 0.0;
  /// The minimizing q with coordinate k fixed at `sign`.
  Eigen::VectorXd minimizer;
  bool converged = true;
  int iterations = 0;
};

/// sigma(sign * e_k) = 1 / inf{1/S(q) : q_k = sign}. For p=1 this is S(sign).
/// Component indices are 0-based.
SupportValue support_function(const RadialSource& source, int k, int sign, double epsilon,
                              const OptimizerSettings& settings = {});

struct ProjectionInterval {
  double lower = 0.0;
  double upper = 0.0;
  SupportValue lower_support;
  SupportValue upper_support;
};

/// [-sigma(-e_k), sigma(e_k)].
ProjectionInterval projection_interval(const RadialSource& source, int k, double epsilon,
                                       const OptimizerSettings& settings = {});

}  // namespace combreg
