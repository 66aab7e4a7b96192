#include "combreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "combreg/errors.hpp"
#include "combreg/parallel.hpp"

namespace combreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double halton(std::size_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
  }
  return r;
}

int nth_prime(int k) {
  int found = 0;
  for (int c = 2;; ++c) {
    bool prime = true;
    for (int d = 2; d * d <= c; ++d) {
      if (c % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime && found++ == k) return c;
  }
}

void check_nonsingular(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top > 0.0) || !(bottom > 1e-12 * top)) {
    throw NumericalError("covariate sample covariance is singular");
  }
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Appends the hull chain strictly between a and b (exclusive) for the points
// lying to the right of a->b, in order from a to b.
void quickhull_side(const std::vector<Eigen::Vector2d>& pts, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b, std::vector<Eigen::Vector2d>& out) {
  double best = 0.0;
  std::size_t far = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = -cross(a, b, pts[i]);
    if (d > best) {
      best = d;
      far = i;
    }
  }
  if (far == pts.size()) return;
  const Eigen::Vector2d c = pts[far];
  std::vector<Eigen::Vector2d> left;
  std::vector<Eigen::Vector2d> right;
  for (const auto& p : pts) {
    if (-cross(a, c, p) > 0.0) left.push_back(p);
    else if (-cross(c, b, p) > 0.0) right.push_back(p);
  }
  quickhull_side(left, a, c, out);
  out.push_back(c);
  quickhull_side(right, c, b, out);
}

}  // namespace

std::vector<Eigen::VectorXd> sphere_grid(int dimension, int count) {
  if (dimension < 1) throw ValidationError("sphere grid: dimension must be positive");
  std::vector<Eigen::VectorXd> dirs;
  if (dimension == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
    return dirs;
  }
  if (count < 2) throw ValidationError("sphere grid: need at least two directions");
  dirs.reserve(static_cast<std::size_t>(count));
  if (dimension == 2) {
    for (int i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / count;
      Eigen::VectorXd q(2);
      q << std::cos(angle), std::sin(angle);
      dirs.push_back(q);
    }
    return dirs;
  }
  if (dimension == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::VectorXd q(3);
      q << r * std::cos(golden * i), r * std::sin(golden * i), z;
      dirs.push_back(q / q.norm());
    }
    return dirs;
  }
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd q(dimension);
    for (int d = 0; d < dimension; ++d) {
      const double u = halton(static_cast<std::size_t>(i) + 1, nth_prime(d));
      q[d] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
    }
    dirs.push_back(q / q.norm());
  }
  return dirs;
}

int default_direction_count(int dimension) {
  if (dimension <= 1) return 2;
  if (dimension == 2) return 1000;
  return 2000;
}

RadialValue radial_value(const SuperquantileCurve& outcome, const EmpiricalDist& projection, double epsilon) {
  if (projection.degenerate()) throw ValidationError("degenerate projection: covariate index is constant");
  const SuperquantileCurve g(projection);
  return epsilon == 0.0 ? s_unregularized(outcome, g) : s_epsilon(outcome, g, epsilon);
}

RadialProblem::RadialProblem(std::span<const double> y, Eigen::MatrixXd x)
    : y_(EmpiricalDist::from_sample(y).centered()), y_curve_(y_), x_(std::move(x)) {
  if (x_.rows() < 2 || x_.cols() < 1) throw ValidationError("covariate sample needs at least two rows");
  if (!x_.allFinite()) throw ValidationError("covariate sample contains non-finite values");
  check_nonsingular(sample_covariance(x_));
}

EmpiricalDist RadialProblem::projected(const Eigen::VectorXd& q) const {
  if (q.size() != x_.cols()) throw ValidationError("direction dimension does not match covariates");
  const Eigen::VectorXd proj = x_ * q;
  return EmpiricalDist::from_sample(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size())))
      .centered();
}

RadialValue RadialProblem::evaluate(const Eigen::VectorXd& q, double epsilon) const {
  if (q.norm() == 0.0) {
    RadialValue r;
    r.direction = q;
    r.epsilon = epsilon;
    r.value = kInf;
    return r;
  }
  RadialValue r = radial_value(y_curve_, projected(q), epsilon);
  r.direction = q;
  return r;
}

bool StarSet::all_empty() const {
  return std::all_of(empty.begin(), empty.end(), [](bool e) { return e; });
}

void StarSet::compute_hull() {
  hull_vertices.clear();
  if (dimension != 2) return;
  std::vector<Eigen::Vector2d> pts;
  for (std::size_t i = 0; i < size(); ++i) {
    if (empty[i]) continue;
    for (double lam : {lower[i], upper[i]}) {
      if (std::isfinite(lam)) pts.emplace_back(lam * directions[i][0], lam * directions[i][1]);
    }
  }
  hull_vertices = convex_hull_2d(std::move(pts));
}

StarSet radial_set(const RadialSource& source, const std::vector<Eigen::VectorXd>& directions,
                   const std::vector<double>& epsilons) {
  if (epsilons.size() != directions.size()) throw ValidationError("one epsilon per direction required");
  StarSet set;
  set.dimension = source.dimension();
  set.directions = directions;
  set.epsilon = epsilons;
  set.lower.assign(directions.size(), 0.0);
  set.upper.assign(directions.size(), 0.0);
  set.empty.assign(directions.size(), false);
  parallel_for(directions.size(), [&](std::size_t i) {
    set.upper[i] = source.evaluate(directions[i], epsilons[i]).value;
  });
  set.compute_hull();
  return set;
}

StarSet radial_set(const RadialSource& source, const std::vector<Eigen::VectorXd>& directions,
                   double epsilon) {
  return radial_set(source, directions, std::vector<double>(directions.size(), epsilon));
}

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;
  const Eigen::Vector2d lo = points.front();
  const Eigen::Vector2d hi = points.back();
  std::vector<Eigen::Vector2d> hull;
  hull.push_back(lo);
  // Points right of lo->hi form the lower chain when walking counter-clockwise.
  quickhull_side(points, lo, hi, hull);
  hull.push_back(hi);
  quickhull_side(points, hi, lo, hull);
  return hull;
}

Ellipsoid::Ellipsoid(Eigen::MatrixXd shape, double radius_sq) : shape_(std::move(shape)), radius_sq_(radius_sq) {
  if (shape_.rows() != shape_.cols() || shape_.rows() == 0) throw ValidationError("ellipsoid: shape must be square");
  if (!(radius_sq_ > 0.0)) throw ValidationError("ellipsoid: radius must be positive");
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + shape_.cwiseAbs().maxCoeff())) {
    throw ValidationError("ellipsoid: shape must be symmetric");
  }
  check_nonsingular(shape_);
  inverse_ = shape_.ldlt().solve(Eigen::MatrixXd::Identity(shape_.rows(), shape_.cols()));
}

double Ellipsoid::radius(const Eigen::VectorXd& q) const {
  return std::sqrt(radius_sq_ / q.dot(shape_ * q));
}

bool Ellipsoid::contains(const Eigen::VectorXd& b, double slack) const {
  return b.dot(shape_ * b) <= radius_sq_ + slack;
}

double Ellipsoid::support(const Eigen::VectorXd& e) const {
  return std::sqrt(radius_sq_ * e.dot(inverse_ * e));
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  return (c.transpose() * c) / static_cast<double>(x.rows());
}

Ellipsoid variance_ellipsoid(std::span<const double> y, const Eigen::MatrixXd& x) {
  const EmpiricalDist fy = EmpiricalDist::from_sample(y);
  const double vy = fy.variance();
  if (!(vy > 0.0)) throw ValidationError("variance ellipsoid: outcome has zero variance");
  return Ellipsoid(sample_covariance(x), vy);
}

SupportValue support_function(const RadialSource& source, int k, int sign, double epsilon,
                              const OptimizerSettings& settings) {
  const int p = source.dimension();
  if (k < 0 || k >= p) throw ValidationError("support function: component index out of range");
  if (sign != 1 && sign != -1) throw ValidationError("support function: sign must be +1 or -1");

  auto embed = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd q(p);
    for (int i = 0, j = 0; i < p; ++i) q[i] = (i == k) ? static_cast<double>(sign) : z[j++];
    return q;
  };
  auto gauge = [&](const Eigen::VectorXd& z) {
    const double s = source.evaluate(embed(z), epsilon).value;
    return s > 0.0 ? 1.0 / s : kInf;
  };

  SupportValue out;
  out.component_index = k;
  out.sign = sign;
  const OptimizeResult r = minimize_quasi_newton(gauge, Eigen::VectorXd::Zero(p - 1), settings);
  out.minimizer = embed(r.x);
  out.value = std::isfinite(r.value) ? source.evaluate(out.minimizer, epsilon).value : 0.0;
  out.converged = r.converged;
  out.iterations = r.iterations;
  return out;
}

ProjectionInterval projection_interval(const RadialSource& source, int k, double epsilon,
                                       const OptimizerSettings& settings) {
  ProjectionInterval out;
  out.upper_support = support_function(source, k, 1, epsilon, settings);
  out.lower_support = support_function(source, k, -1, epsilon, settings);
  out.upper = out.upper_support.value;
  out.lower = -out.lower_support.value;
  return out;
}

}  // namespace combreg
