#pragma once

#include <functional>

#include <Eigen/Dense>

namespace combreg {

struct OptimizerSettings {
  double fd_step = 1e-6;
  double rel_tol = 1e-8;
  int max_iterations = 500;
  /// Also start from +/- each free coordinate direction and keep the best.
  bool multi_start = false;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// BFGS with central finite-difference gradients and Armijo backtracking,
/// followed by a compass search that polishes kinks the quasi-Newton steps
/// stall on. Objective values of +inf are treated as infeasible.
OptimizeResult minimize_quasi_newton(const Objective& f, const Eigen::VectorXd& x0,
                                     const OptimizerSettings& settings = {});

}  // namespace combreg
