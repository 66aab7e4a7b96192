#include "combreg/optimize.hpp"

#include <cmath>
#include <limits>

namespace combreg {

namespace {

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
    if (!std::isfinite(g[i])) g[i] = 0.0;
  }
  return g;
}

OptimizeResult bfgs(const Objective& f, const Eigen::VectorXd& x0, const OptimizerSettings& s) {
  const Eigen::Index d = x0.size();
  OptimizeResult r;
  r.x = x0;
  r.value = f(x0);
  if (d == 0) {
    r.converged = true;
    return r;
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d);
  bool h_is_identity = true;
  Eigen::VectorXd g = fd_gradient(f, r.x, s.fd_step);

  for (r.iterations = 0; r.iterations < s.max_iterations; ++r.iterations) {
    if (g.norm() <= 1e-14) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      dir = -g;
      slope = -g.squaredNorm();
    }

    double t = 1.0;
    Eigen::VectorXd trial;
    double ft = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = r.x + t * dir;
      ft = f(trial);
      if (std::isfinite(ft) && ft <= r.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (h_is_identity) break;  // stalled on a kink; leave it to the polish
      h.setIdentity();
      h_is_identity = true;
      continue;
    }

    const Eigen::VectorXd step = trial - r.x;
    const double scale = 1.0 + r.x.norm();
    r.x = trial;
    r.value = ft;
    if (step.norm() <= s.rel_tol * scale) {
      r.converged = true;
      break;
    }
    const Eigen::VectorXd g_new = fd_gradient(f, r.x, s.fd_step);
    const Eigen::VectorXd y = g_new - g;
    const double sy = step.dot(y);
    if (sy > 1e-14 * step.norm() * y.norm() && sy > 0.0) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
      h = (id - rho * step * y.transpose()) * h * (id - rho * y * step.transpose()) +
          rho * step * step.transpose();
      h_is_identity = false;
    }
    g = g_new;
  }
  return r;
}

void compass_polish(const Objective& f, OptimizeResult& r, const OptimizerSettings& s) {
  const Eigen::Index d = r.x.size();
  if (d == 0) return;
  double step = 1e-2 * (1.0 + r.x.norm());
  const double floor = s.rel_tol * (1.0 + r.x.norm());
  int evaluations = 0;
  const int budget = 200 * static_cast<int>(d) + 400;
  bool moved_any = false;
  while (step > floor && evaluations < budget) {
    bool improved = false;
    for (Eigen::Index i = 0; i < d && !improved; ++i) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = r.x;
        trial[i] += sign * step;
        const double ft = f(trial);
        ++evaluations;
        if (ft < r.value) {
          r.x = trial;
          r.value = ft;
          improved = true;
          moved_any = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (step <= floor) r.converged = true;
  if (moved_any) r.iterations += 1;
}

}  // namespace

OptimizeResult minimize_quasi_newton(const Objective& f, const Eigen::VectorXd& x0,
                                     const OptimizerSettings& settings) {
  OptimizeResult best = bfgs(f, x0, settings);
  compass_polish(f, best, settings);
  if (settings.multi_start) {
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd start = x0;
        start[i] += sign;
        OptimizeResult r = bfgs(f, start, settings);
        compass_polish(f, r, settings);
        if (r.value < best.value) best = r;
      }
    }
  }
  return best;
}

}  // namespace combreg
