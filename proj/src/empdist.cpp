#include "combreg/empdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "combreg/errors.hpp"

namespace combreg {

EmpiricalDist EmpiricalDist::from_sample(std::span<const double> sample) {
  if (sample.empty()) throw ValidationError("empirical distribution: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ValidationError("empirical distribution: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());

  EmpiricalDist d;
  d.count_ = sorted.size();
  const double n = static_cast<double>(sorted.size());
  std::size_t run_start = 0;
  // Summing in sorted order makes the mean independent of the input order.
  long double total = 0.0L;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    if (i + 1 == sorted.size() || sorted[i + 1] != sorted[i]) {
      d.values_.push_back(sorted[i]);
      d.weights_.push_back(static_cast<double>(i + 1 - run_start) / n);
      d.cumulative_.push_back(static_cast<double>(i + 1) / n);
      run_start = i + 1;
    }
  }
  d.cumulative_.back() = 1.0;
  d.mean_ = static_cast<double>(total / static_cast<long double>(sorted.size()));
  return d;
}

EmpiricalDist EmpiricalDist::from_weighted(std::vector<double> values, std::vector<double> weights,
                                           std::size_t count) {
  if (values.empty() || values.size() != weights.size()) {
    throw ValidationError("empirical distribution: values and weights must be non-empty and of equal length");
  }
  long double wsum = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(weights[i]) || weights[i] <= 0.0) {
      throw ValidationError("empirical distribution: weights must be positive and values finite");
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw ValidationError("empirical distribution: values must be strictly increasing");
    }
    wsum += weights[i];
  }
  EmpiricalDist d;
  d.values_ = std::move(values);
  d.weights_ = std::move(weights);
  for (double& w : d.weights_) w = static_cast<double>(w / wsum);
  d.count_ = count == 0 ? d.values_.size() : count;
  d.finish();
  return d;
}

void EmpiricalDist::finish() {
  cumulative_.resize(values_.size());
  long double acc = 0.0L;
  long double m = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += weights_[i];
    m += static_cast<long double>(weights_[i]) * values_[i];
    cumulative_[i] = static_cast<double>(acc);
  }
  cumulative_.back() = 1.0;
  mean_ = static_cast<double>(m);
}

double EmpiricalDist::variance() const {
  long double v = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const long double dev = values_[i] - mean_;
    v += weights_[i] * dev * dev;
  }
  return static_cast<double>(v);
}

EmpiricalDist EmpiricalDist::centered() const {
  EmpiricalDist d = *this;
  if (mean_ == 0.0) return d;
  for (double& v : d.values_) v -= mean_;
  // Shifting can merge neighbours that differ by less than an ulp of the mean.
  std::size_t out = 0;
  for (std::size_t i = 0; i < d.values_.size(); ++i) {
    if (out > 0 && d.values_[i] <= d.values_[out - 1]) {
      d.weights_[out - 1] += d.weights_[i];
      d.cumulative_[out - 1] = d.cumulative_[i];
      continue;
    }
    d.values_[out] = d.values_[i];
    d.weights_[out] = d.weights_[i];
    d.cumulative_[out] = d.cumulative_[i];
    ++out;
  }
  d.values_.resize(out);
  d.weights_.resize(out);
  d.cumulative_.resize(out);
  d.mean_ = 0.0;
  return d;
}

EmpiricalDist EmpiricalDist::scaled(double c) const {
  if (!std::isfinite(c)) throw ValidationError("empirical distribution: non-finite scale");
  if (c == 0.0) return from_weighted({0.0}, {1.0}, count_);
  std::vector<double> v(values_.size());
  std::vector<double> w(weights_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const std::size_t j = c > 0 ? i : values_.size() - 1 - i;
    v[j] = c * values_[i];
    w[j] = weights_[i];
  }
  EmpiricalDist d;
  d.values_ = std::move(v);
  d.weights_ = std::move(w);
  d.count_ = count_;
  d.finish();
  if (mean_ == 0.0) d.mean_ = 0.0;
  return d;
}

double EmpiricalDist::cdf(double v) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), v);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double EmpiricalDist::quantile(double t) const {
  if (!(t > 0.0 && t <= 1.0)) throw ValidationError("quantile: level must lie in (0, 1]");
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), t);
  const auto idx = it == cumulative_.end() ? values_.size() - 1 : static_cast<std::size_t>(it - cumulative_.begin());
  return values_[idx];
}

double sample_quantile(std::vector<double> sample, double t) {
  if (sample.empty()) throw ValidationError("quantile: empty sample");
  if (!(t > 0.0 && t <= 1.0)) throw ValidationError("quantile: level must lie in (0, 1]");
  for (double v : sample) {
    if (std::isnan(v)) throw ValidationError("quantile: NaN in sample");
  }
  const auto n = sample.size();
  // inf{x : #{x_i <= x}/n >= t}: the ceil(t n)-th order statistic.
  auto rank = static_cast<std::size_t>(std::ceil(t * static_cast<double>(n) - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(rank - 1), sample.end());
  return sample[rank - 1];
}

SuperquantileCurve::SuperquantileCurve(const EmpiricalDist& dist) {
  if (dist.degenerate()) {
    throw ValidationError("superquantile curve: distribution has a single support point");
  }
  const auto& v = dist.values();
  const auto& w = dist.weights();
  const double scale = std::max(std::abs(v.front()), std::abs(v.back()));
  if (std::abs(dist.mean()) > 1e-10 * std::max(1.0, scale)) {
    throw ValidationError("superquantile curve: distribution is not centered");
  }
  const std::size_t m = v.size();
  knots_.resize(m + 1);
  curve_.resize(m + 1);
  knots_[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) knots_[i + 1] = dist.cumulative()[i];

  // Value at knot i is sum_{j >= i} w_j v_j, or equivalently -sum_{j < i} w_j v_j.
  // Use whichever side has fewer terms so the tails avoid cancellation.
  std::vector<long double> prefix(m + 1, 0.0L);
  for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + static_cast<long double>(w[i]) * v[i];
  std::vector<long double> suffix(m + 1, 0.0L);
  for (std::size_t i = m; i-- > 0;) suffix[i] = suffix[i + 1] + static_cast<long double>(w[i]) * v[i];
  for (std::size_t i = 0; i <= m; ++i) {
    curve_[i] = static_cast<double>(knots_[i] < 0.5 ? -prefix[i] : suffix[i]);
  }
  curve_.front() = 0.0;
  curve_.back() = 0.0;
  lower_slope_ = -v.front();
  upper_slope_ = v.back();
}

double SuperquantileCurve::operator()(double alpha) const {
  if (alpha <= 0.0) return curve_.front();
  if (alpha >= 1.0) return curve_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), alpha);
  const auto hi = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t lo = hi - 1;
  if (knots_[lo] == alpha) return curve_[lo];
  const double span = knots_[hi] - knots_[lo];
  const double t = (alpha - knots_[lo]) / span;
  return curve_[lo] + t * (curve_[hi] - curve_[lo]);
}

}  // namespace combreg
