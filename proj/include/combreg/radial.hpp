#pragma once

#include <Eigen/Dense>

#include "combreg/empdist.hpp"

namespace combreg {

/// One boundary point of a star-shaped set: the radial value in a direction.
struct RadialValue {
  Eigen::VectorXd direction;  // empty when the caller has no direction attached
  double epsilon = 0.0;
  double value = 0.0;
  double argmin_alpha = 0.5;
  /// Index of the minimizing cell when the value is an infimum over cells.
  int cell = -1;
};

/// F(alpha) / G(alpha) on two superquantile curves. alpha must lie in (0, 1).
double ratio_r(double alpha, const SuperquantileCurve& f, const SuperquantileCurve& g);

/// Exact minimum of ratio_r over [epsilon, 1 - epsilon], epsilon in (0, 1/2].
/// The ratio is a Moebius function between consecutive knots of either curve,
/// so only knots and the two trimming points are evaluated. Ties resolve to
/// the smallest alpha.
RadialValue s_epsilon(const SuperquantileCurve& f, const SuperquantileCurve& g, double epsilon);

/// Untrimmed minimum over (0, 1): every interior knot plus the limit ratios at
/// 0+ and 1-. Reported with epsilon = 0; argmin_alpha is 0 or 1 when a limit wins.
RadialValue s_unregularized(const SuperquantileCurve& f, const SuperquantileCurve& g);

/// True iff E[max(0, F - t)] >= E[max(0, G - t)] for every t, i.e. F is a
/// mean-preserving spread of G. Both inputs must be centered. Kinks are
/// checked exactly with a relative slack of 1e-12.
bool dominance_check(const EmpiricalDist& f, const EmpiricalDist& g);

/// sup{lambda >= 0 : dominance_check(F, lambda G)} found by bisection to
/// width `tol`. Independent of the knot algorithm; used as an oracle.
double s_oracle_bisection(const EmpiricalDist& f, const EmpiricalDist& g, double tol);

}  // namespace combreg
