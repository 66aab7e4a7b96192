#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace combreg {

/// Empirical distribution of a univariate sample: distinct sorted support
/// points with their relative frequencies.
///
/// Invariants: values strictly increasing, weights > 0 summing to one, and
/// mean equal to the weighted average of values. Immutable once built.
class EmpiricalDist {
 public:
  /// Merges exact ties into weights. Throws ValidationError on an empty
  /// sample or a non-finite value.
  static EmpiricalDist from_sample(std::span<const double> sample);

  /// Builds from an explicit support. `values` must be strictly increasing and
  /// `weights` positive; weights are renormalized to sum to one.
  static EmpiricalDist from_weighted(std::vector<double> values, std::vector<double> weights,
                                     std::size_t count = 0);

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Cumulative weights; cumulative().back() == 1 exactly.
  const std::vector<double>& cumulative() const { return cumulative_; }
  double mean() const { return mean_; }
  std::size_t count() const { return count_; }
  std::size_t support_size() const { return values_.size(); }
  bool degenerate() const { return values_.size() < 2; }

  double variance() const;
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  /// Shifts the support by -mean. The result has mean exactly 0, so
  /// centering twice is the identity.
  EmpiricalDist centered() const;

  /// Returns the distribution of c * X (c > 0 keeps the order, c < 0 reverses it).
  EmpiricalDist scaled(double c) const;

  /// Step cdf F(v) = P(X <= v).
  double cdf(double v) const;

  /// Generalized inverse inf{x : F(x) >= t}, t in (0, 1].
  double quantile(double t) const;

 private:
  EmpiricalDist() = default;
  void finish();

  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
  std::size_t count_ = 0;
};

/// Generalized-inverse quantile of a raw sample (same convention as
/// EmpiricalDist::quantile). Infinite entries are allowed; NaN is not.
double sample_quantile(std::vector<double> sample, double t);

/// The piecewise-linear map alpha -> integral_alpha^1 F^{-1}(t) dt of a centered
/// empirical distribution, stored at its knots {0} u {cumulative weights}.
class SuperquantileCurve {
 public:
  /// Throws ValidationError when `dist` is not centered (|mean| > 1e-10 times
  /// its scale) or has a single support point.
  explicit SuperquantileCurve(const EmpiricalDist& dist);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& curve_values() const { return curve_; }

  /// Linear interpolation between knots; alpha is clamped to [0, 1].
  double operator()(double alpha) const;

  /// Right-derivative at 0+, i.e. -(smallest centered value).
  double lower_tail_slope() const { return lower_slope_; }
  /// -(left-derivative at 1-), i.e. the largest centered value.
  double upper_tail_slope() const { return upper_slope_; }

 private:
  std::vector<double> knots_;
  std::vector<double> curve_;
  double lower_slope_ = 0.0;
  double upper_slope_ = 0.0;
};

}  // namespace combreg
