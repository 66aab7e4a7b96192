#include "combreg/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "combreg/errors.hpp"

namespace combreg {

namespace {

// Evaluates a curve at a nondecreasing sequence of alphas in amortized O(1).
class Cursor {
 public:
  explicit Cursor(const SuperquantileCurve& c) : knots_(c.knots()), vals_(c.curve_values()) {}

  double at(double alpha) {
    while (pos_ + 1 < knots_.size() && knots_[pos_ + 1] <= alpha) ++pos_;
    if (knots_[pos_] == alpha || pos_ + 1 == knots_.size()) return vals_[pos_];
    const double t = (alpha - knots_[pos_]) / (knots_[pos_ + 1] - knots_[pos_]);
    return vals_[pos_] + t * (vals_[pos_ + 1] - vals_[pos_]);
  }

 private:
  const std::vector<double>& knots_;
  const std::vector<double>& vals_;
  std::size_t pos_ = 0;
};

struct Best {
  double value = std::numeric_limits<double>::infinity();
  double alpha = 0.5;

  void offer(double v, double a) {
    if (v < value) {
      value = v;
      alpha = a;
    }
  }
};

// Visits the merged interior knots of both curves strictly inside (lo, hi), in
// increasing order, without duplicates.
template <typename Visit>
void for_merged_knots(const SuperquantileCurve& f, const SuperquantileCurve& g, double lo, double hi,
                      Visit&& visit) {
  const auto& a = f.knots();
  const auto& b = g.knots();
  std::size_t i = std::upper_bound(a.begin(), a.end(), lo) - a.begin();
  std::size_t j = std::upper_bound(b.begin(), b.end(), lo) - b.begin();
  double last = lo;
  while (true) {
    const double ka = i < a.size() ? a[i] : 2.0;
    const double kb = j < b.size() ? b[j] : 2.0;
    const double k = std::min(ka, kb);
    if (!(k < hi)) break;
    if (k > last) {
      visit(k);
      last = k;
    }
    if (ka == k) ++i;
    if (kb == k) ++j;
  }
}

double checked_ratio(double num, double den) {
  if (!(den > 0.0)) throw NumericalError("radial function: non-positive denominator curve value");
  return std::max(0.0, num) / den;
}

}  // namespace

double ratio_r(double alpha, const SuperquantileCurve& f, const SuperquantileCurve& g) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("ratio R: alpha must lie in (0, 1)");
  return checked_ratio(f(alpha), g(alpha));
}

RadialValue s_epsilon(const SuperquantileCurve& f, const SuperquantileCurve& g, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw ValidationError("epsilon must lie in (0, 1/2]");
  const double lo = epsilon;
  const double hi = 1.0 - epsilon;
  Cursor cf(f);
  Cursor cg(g);
  Best best;
  best.offer(checked_ratio(cf.at(lo), cg.at(lo)), lo);
  for_merged_knots(f, g, lo, hi, [&](double k) { best.offer(checked_ratio(cf.at(k), cg.at(k)), k); });
  if (hi > lo) best.offer(checked_ratio(cf.at(hi), cg.at(hi)), hi);

  RadialValue out;
  out.epsilon = epsilon;
  out.value = best.value;
  out.argmin_alpha = best.alpha;
  return out;
}

RadialValue s_unregularized(const SuperquantileCurve& f, const SuperquantileCurve& g) {
  Cursor cf(f);
  Cursor cg(g);
  Best best;
  best.offer(checked_ratio(f.lower_tail_slope(), g.lower_tail_slope()), 0.0);
  for_merged_knots(f, g, 0.0, 1.0, [&](double k) { best.offer(checked_ratio(cf.at(k), cg.at(k)), k); });
  best.offer(checked_ratio(f.upper_tail_slope(), g.upper_tail_slope()), 1.0);

  RadialValue out;
  out.epsilon = 0.0;
  out.value = best.value;
  out.argmin_alpha = best.alpha;
  return out;
}

bool dominance_check(const EmpiricalDist& f, const EmpiricalDist& g) {
  const auto& fv = f.values();
  const auto& fw = f.weights();
  const auto& gv = g.values();
  const auto& gw = g.weights();

  double scale = 0.0;
  for (double v : {fv.front(), fv.back(), gv.front(), gv.back()}) scale = std::max(scale, std::abs(v));
  const double slack = 1e-12 * std::max(scale, 1e-300);

  // Means must agree for the left tails to coincide.
  if (std::abs(f.mean() - g.mean()) > slack) return false;

  // h(t) = sum_{v > t} w (v - t) = S1(t) - t S0(t); walk t over all kinks from
  // the top, accumulating suffix sums for each distribution.
  std::vector<double> kinks;
  kinks.reserve(fv.size() + gv.size());
  std::merge(fv.begin(), fv.end(), gv.begin(), gv.end(), std::back_inserter(kinks));
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  std::size_t i = fv.size();
  std::size_t j = gv.size();
  long double f0 = 0.0L, f1 = 0.0L, g0 = 0.0L, g1 = 0.0L;
  for (std::size_t k = kinks.size(); k-- > 0;) {
    const double t = kinks[k];
    while (i > 0 && fv[i - 1] > t) {
      --i;
      f0 += fw[i];
      f1 += static_cast<long double>(fw[i]) * fv[i];
    }
    while (j > 0 && gv[j - 1] > t) {
      --j;
      g0 += gw[j];
      g1 += static_cast<long double>(gw[j]) * gv[j];
    }
    const long double hf = f1 - t * f0;
    const long double hg = g1 - t * g0;
    if (hf < hg - slack) return false;
  }
  return true;
}

double s_oracle_bisection(const EmpiricalDist& f, const EmpiricalDist& g, double tol) {
  if (!(tol > 0.0)) throw ValidationError("bisection tolerance must be positive");
  if (f.degenerate() || g.degenerate()) throw ValidationError("bisection oracle: degenerate distribution");
  double lo = 0.0;
  double hi = std::sqrt(f.variance() / g.variance()) + 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (dominance_check(f, g.scaled(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace combreg
