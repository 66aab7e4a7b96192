#include "combreg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/special_functions/erf.hpp>

#include "combreg/errors.hpp"
#include "combreg/parallel.hpp"

namespace combreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-10;

// Ascending grid restricted to epsilons whose trimmed tails hold at least
// min_tail_count rows of every subsample. The largest value is always kept.
std::vector<double> admissible_grid(const InferenceConfig& config, const SubsampleSizes& sizes) {
  auto g = config.epsilon_grid;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  const auto rows = static_cast<double>(std::min(sizes.b_y, sizes.b_x));
  std::erase_if(g, [&](double e) { return e < g.back() && e * rows < config.min_tail_count; });
  return g;
}

struct Prepared {
  TwoSampleDataset data;
  std::size_t cell_count = 0;
  double n = 0.0;
  std::vector<std::string> warnings;
};

Prepared prepare(const TwoSampleDataset& data, const InferenceConfig& config) {
  config.validate();
  data.validate();
  Prepared p;
  const CellPartition part = residualize(data, config.min_cell);
  for (const auto& e : part.excluded()) p.warnings.push_back("cell '" + e.label + "' excluded: " + e.reason);
  p.data = retained_rows(data, config.min_cell);
  p.cell_count = part.cells().size();
  p.n = p.data.effective_n();
  return p;
}

CellPartition partition_with(const TwoSampleDataset& d, std::size_t min_cell, std::size_t expected_cells) {
  CellPartition part = residualize(d, min_cell);
  if (part.cells().size() != expected_cells) throw NumericalError("subsample lost a common-regressor cell");
  return part;
}

// Index minimizing `bound`, ties toward the larger epsilon (grid ascending).
std::size_t argmin_toward_larger(const std::vector<double>& bound) {
  std::size_t best = 0;
  for (std::size_t e = 1; e < bound.size(); ++e) {
    if (bound[e] <= bound[best] || std::isnan(bound[best])) best = e;
  }
  return best;
}

ConfidenceRegion region_impl(const TwoSampleDataset& input, const std::vector<Eigen::VectorXd>& directions,
                             const ConstraintSpec* spec, const InferenceConfig& config) {
  if (directions.empty()) throw ValidationError("no directions given");
  Prepared prep = prepare(input, config);
  const auto grid = admissible_grid(config, subsample_sizes(prep.data, config.b_n));
  const std::size_t ne = grid.size();
  const std::size_t nd = directions.size();
  const int p = prep.data.dimension();
  for (const auto& q : directions) {
    if (q.size() != p) throw ValidationError("direction dimension does not match the covariates");
  }
  auto index = [nd](std::size_t e, std::size_t i, int side) { return 2 * (e * nd + i) + static_cast<std::size_t>(side); };

  std::vector<std::string> set_warnings;
  auto evaluate = [&](const CellPartition& part, std::vector<std::string>* warnings) {
    std::vector<double> out(2 * ne * nd, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
      if (spec == nullptr) {
        std::vector<double> upper(nd);
        parallel_for(nd, [&](std::size_t i) { upper[i] = part.evaluate(directions[i], grid[e]).value; });
        for (std::size_t i = 0; i < nd; ++i) out[index(e, i, 1)] = upper[i];
      } else {
        const auto cs = constrained_set(part, *spec, directions, grid[e]);
        for (std::size_t i = 0; i < nd; ++i) {
          out[index(e, i, 0)] = cs.set.lower[i];
          out[index(e, i, 1)] = cs.set.upper[i];
        }
        if (warnings != nullptr && e == 0) *warnings = cs.warnings;
      }
    }
    return out;
  };

  const CellPartition full = partition_with(prep.data, config.min_cell_subsample, prep.cell_count);
  auto estimate = evaluate(full, &set_warnings);
  const auto draws = subsample_statistic(
      prep.data, estimate,
      [&](const TwoSampleDataset& d) {
        return evaluate(partition_with(d, config.min_cell_subsample, prep.cell_count), nullptr);
      },
      config);

  const double alpha = config.alpha();
  const double root_n = std::sqrt(prep.n);
  const double t_upper = spec ? alpha / 2.0 : alpha;
  const double t_lower = 1.0 - alpha / 2.0;

  // Trimmed bounds for every (epsilon, direction).
  std::vector<double> lo(ne * nd), up(ne * nd), c_lo(ne * nd), c_up(ne * nd);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t i = 0; i < nd; ++i) {
      const std::size_t j = e * nd + i;
      c_up[j] = draws.quantile(index(e, i, 1), t_upper);
      up[j] = estimate[index(e, i, 1)] - c_up[j] / root_n;
      if (spec) {
        c_lo[j] = draws.quantile(index(e, i, 0), t_lower);
        lo[j] = std::max(0.0, estimate[index(e, i, 0)] - c_lo[j] / root_n);
      } else {
        c_lo[j] = 0.0;
        lo[j] = 0.0;
      }
    }
  }

  std::vector<std::size_t> choice(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    std::vector<double> b(ne);
    for (std::size_t e = 0; e < ne; ++e) b[e] = up[e * nd + i];
    choice[i] = argmin_toward_larger(b);
  }
  if (p > 1) {
    const std::size_t lowest = *std::min_element(choice.begin(), choice.end());
    std::fill(choice.begin(), choice.end(), lowest);
  }

  ConfidenceRegion out;
  out.level = config.level;
  out.n = prep.n;
  out.sizes = draws.sizes;
  out.replications = draws.replications;
  out.dropped = draws.dropped;
  out.warnings = prep.warnings;
  out.warnings.insert(out.warnings.end(), set_warnings.begin(), set_warnings.end());
  if (draws.dropped > 0) {
    out.warnings.push_back(std::to_string(draws.dropped) + " of " + std::to_string(draws.replications) +
                           " subsampling replications dropped");
  }
  for (StarSet* s : {&out.estimate, &out.region}) {
    s->dimension = p;
    s->directions = directions;
    s->lower.resize(nd);
    s->upper.resize(nd);
    s->epsilon.resize(nd);
    s->empty.resize(nd);
  }
  out.critical_lower.resize(nd);
  out.critical_upper.resize(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    const std::size_t e = choice[i];
    const std::size_t j = e * nd + i;
    const double est_lo = estimate[index(e, i, 0)];
    const double est_up = estimate[index(e, i, 1)];
    out.estimate.lower[i] = est_lo;
    out.estimate.upper[i] = est_up;
    out.estimate.epsilon[i] = grid[e];
    out.estimate.empty[i] = !(est_lo <= est_up);
    out.region.epsilon[i] = grid[e];
    out.region.lower[i] = lo[j];
    out.region.upper[i] = spec ? up[j] : std::max(0.0, up[j]);
    out.region.empty[i] = !(out.region.lower[i] <= out.region.upper[i]);
    out.critical_lower[i] = c_lo[j];
    out.critical_upper[i] = c_up[j];
  }
  out.estimate.compute_hull();
  out.region.compute_hull();
  if (spec && out.region.all_empty()) out.warnings.push_back("confidence region is empty");
  return out;
}

Eigen::VectorXd ols_slope(std::span<const double> y, const Eigen::MatrixXd& x) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (n != x.rows() || n < x.cols() + 2) throw ValidationError("validation sample too small for least squares");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd yc = yv.array() - yv.mean();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
  qr.setThreshold(1e-12);
  if (qr.rank() < x.cols()) throw NumericalError("least squares design is singular");
  return qr.solve(yc);
}

double s_at(std::span<const double> y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double epsilon) {
  const EmpiricalDist fy = EmpiricalDist::from_sample(y).centered();
  if (fy.degenerate()) throw ValidationError("validation outcome is constant");
  const SuperquantileCurve curve(fy);
  const Eigen::VectorXd proj = x * beta;
  const EmpiricalDist fx = EmpiricalDist::from_sample(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size()))).centered();
  return radial_value(curve, fx, epsilon).value;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal quantile: probability must lie in (0, 1)");
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

ConfidenceRegion confidence_region(const TwoSampleDataset& data, const std::vector<Eigen::VectorXd>& directions,
                                   const InferenceConfig& config) {
  return region_impl(data, directions, nullptr, config);
}

double select_epsilon(const TwoSampleDataset& data, const Eigen::VectorXd& q, const InferenceConfig& config) {
  if (config.epsilon_grid.size() == 1) {
    config.validate();
    return config.epsilon_grid.front();
  }
  return region_impl(data, {q}, nullptr, config).region.epsilon.front();
}

ConfidenceRegion constrained_region(const TwoSampleDataset& data, const std::vector<Eigen::VectorXd>& directions,
                                    const ConstraintSpec& spec, const InferenceConfig& config) {
  return region_impl(data, directions, &spec, config);
}

ComponentInterval confidence_interval_component(const TwoSampleDataset& input, int k, const InferenceConfig& config) {
  Prepared prep = prepare(input, config);
  if (k < 0 || k >= prep.data.dimension()) throw ValidationError("component index out of range");
  const auto grid = admissible_grid(config, subsample_sizes(prep.data, config.b_n));
  const std::size_t ne = grid.size();

  // Layout: 2e is sigma(e_k), 2e + 1 is sigma(-e_k).
  auto evaluate = [&](const CellPartition& part) {
    std::vector<double> out(2 * ne);
    parallel_for(2 * ne, [&](std::size_t j) {
      const int sign = (j % 2 == 0) ? 1 : -1;
      out[j] = support_function(part, k, sign, grid[j / 2], config.optimizer).value;
    });
    return out;
  };
  auto estimate = evaluate(partition_with(prep.data, config.min_cell_subsample, prep.cell_count));
  const auto draws = subsample_statistic(
      prep.data, estimate,
      [&](const TwoSampleDataset& d) {
        return evaluate(partition_with(d, config.min_cell_subsample, prep.cell_count));
      },
      config);

  const double root_n = std::sqrt(prep.n);
  const double alpha = config.alpha();
  std::vector<double> up(ne), down(ne), c_up(ne), c_down(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    c_up[e] = draws.quantile(2 * e, alpha);
    c_down[e] = draws.quantile(2 * e + 1, alpha);
    up[e] = estimate[2 * e] - c_up[e] / root_n;
    down[e] = estimate[2 * e + 1] - c_down[e] / root_n;
  }
  const std::size_t eu = argmin_toward_larger(up);
  const std::size_t ed = argmin_toward_larger(down);

  ComponentInterval out;
  out.component = k;
  out.upper = std::max(0.0, up[eu]);
  out.lower = std::min(0.0, -down[ed]);
  out.estimate_upper = estimate[2 * eu];
  out.estimate_lower = -estimate[2 * ed + 1];
  out.epsilon_upper = grid[eu];
  out.epsilon_lower = grid[ed];
  out.critical_upper = c_up[eu];
  out.critical_lower = c_down[ed];
  out.level = config.level;
  out.n = prep.n;
  out.sizes = draws.sizes;
  out.replications = draws.replications;
  out.dropped = draws.dropped;
  return out;
}

TestResult point_id_test(std::span<const double> y, const Eigen::MatrixXd& x, const InferenceConfig& config,
                         double epsilon_multiplier) {
  config.validate();
  if (!(epsilon_multiplier > 0.0)) throw ValidationError("epsilon multiplier must be positive");
  const std::size_t n = y.size();
  const Eigen::VectorXd beta = ols_slope(y, x);
  const double scale = std::sqrt(x.colwise().squaredNorm().maxCoeff() / static_cast<double>(n));
  if (!(beta.norm() * scale > 1e-12)) throw NumericalError("least squares slope is zero; the test is undefined");

  TestResult out;
  out.kind = TestKind::point_id;
  out.auxiliary = beta;
  double eps = config.epsilon_grid.front();
  if (config.epsilon_grid.size() > 1) {
    const auto d = TwoSampleDataset::without_common(std::vector<double>(y.begin(), y.end()), x);
    eps = select_epsilon(d, beta / beta.norm(), config);
  }
  out.epsilon = std::min(0.5, eps * epsilon_multiplier);

  const double s_hat = s_at(y, x, beta, out.epsilon);
  SubsampleSizes sizes;
  sizes.b_n = config.b_n ? *config.b_n : default_subsample_size(static_cast<double>(n));
  if (sizes.b_n > n) throw ValidationError("subsample size exceeds the sample size");
  sizes.b_y = sizes.b_x = sizes.b_n;
  const auto draws = run_subsampling({s_hat}, sizes, config.replications, config.seed, [&](Rng& rng) {
    auto rows = sample_without_replacement(rng, n, sizes.b_n);
    std::sort(rows.begin(), rows.end());
    std::vector<double> ys(rows.size());
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      ys[r] = y[rows[r]];
      xs.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    }
    const Eigen::VectorXd b = ols_slope(ys, xs);
    return std::vector<double>{s_at(ys, xs, b, out.epsilon)};
  });

  // Differences below kTieTolerance on the S scale are rounding, e.g. Y = X exactly.
  const double root_n = std::sqrt(static_cast<double>(n));
  const double tie = kTieTolerance * root_n;
  out.statistic = root_n * (s_hat - 1.0);
  out.critical_value = draws.quantile(0, 1.0 - config.alpha());
  out.reject = out.statistic > out.critical_value + tie;
  const auto& t = draws.draws[0];
  const auto at_least = std::count_if(t.begin(), t.end(), [&](double v) { return v >= out.statistic - tie; });
  out.p_value = static_cast<double>(at_least) / static_cast<double>(t.size());
  out.sizes = sizes;
  out.replications = draws.replications;
  out.dropped = draws.dropped;
  return out;
}

TstslsResult tstsls(const TwoSampleDataset& data, double level) {
  data.validate();
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  const int p = data.dimension();
  const std::size_t k = data.cells.size();

  // First stage: with saturated cell dummies the fitted values are cell means.
  std::vector<std::size_t> nx(k, 0);
  std::vector<Eigen::VectorXd> mx(k, Eigen::VectorXd::Zero(p));
  for (std::size_t i = 0; i < data.n_x(); ++i) {
    const auto c = static_cast<std::size_t>(data.x_cell[i]);
    ++nx[c];
    mx[c] += data.x.row(static_cast<Eigen::Index>(i)).transpose();
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (nx[c] > 0) mx[c] /= static_cast<double>(nx[c]);
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.n_y(); ++i) {
    if (nx[static_cast<std::size_t>(data.y_cell[i])] > 0) rows.push_back(i);
  }
  std::size_t used_cells = 0;
  {
    std::vector<char> seen(k, 0);
    for (std::size_t i : rows) seen[static_cast<std::size_t>(data.y_cell[i])] = 1;
    for (char s : seen) used_cells += s;
  }
  if (used_cells < 2) throw NumericalError("first stage is rank deficient: fewer than two common cells in both samples");

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd w(m, p + 1);
  Eigen::VectorXd yv(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = rows[static_cast<std::size_t>(r)];
    w(r, 0) = 1.0;
    w.row(r).tail(p) = mx[static_cast<std::size_t>(data.y_cell[i])].transpose();
    yv[r] = data.y[i];
  }
  const Eigen::MatrixXd a = w.transpose() * w;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < p + 1) throw NumericalError("predicted regressors have no variation across cells");
  const Eigen::MatrixXd a_inv = lu.inverse();
  const Eigen::VectorXd theta = a_inv * (w.transpose() * yv);
  const Eigen::VectorXd resid = yv - w * theta;
  const Eigen::VectorXd beta = theta.tail(p);

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (Eigen::Index r = 0; r < m; ++r) meat += resid[r] * resid[r] * w.row(r).transpose() * w.row(r);

  // First-stage noise: cell mean of X'beta estimated from n_x(c) rows.
  std::vector<double> var_mean(k, 0.0);
  for (std::size_t i = 0; i < data.n_x(); ++i) {
    const auto c = static_cast<std::size_t>(data.x_cell[i]);
    const double v = (data.x.row(static_cast<Eigen::Index>(i)).transpose() - mx[c]).dot(beta);
    var_mean[c] += v * v;
  }
  std::vector<Eigen::VectorXd> g(k, Eigen::VectorXd::Zero(p + 1));
  for (Eigen::Index r = 0; r < m; ++r) g[static_cast<std::size_t>(data.y_cell[rows[static_cast<std::size_t>(r)]])] += w.row(r).transpose();
  for (std::size_t c = 0; c < k; ++c) {
    if (nx[c] == 0) continue;
    const double nc = static_cast<double>(nx[c]);
    meat += (var_mean[c] / (nc * nc)) * g[c] * g[c].transpose();
  }
  const Eigen::MatrixXd v = a_inv * meat * a_inv;

  TstslsResult out;
  out.level = level;
  out.intercept = theta[0];
  out.beta = beta;
  out.std_error = v.diagonal().tail(p).cwiseMax(0.0).cwiseSqrt();
  const double z = normal_quantile(0.5 + level / 2.0);
  out.ci_lower = beta - z * out.std_error;
  out.ci_upper = beta + z * out.std_error;
  return out;
}

TestResult equality_test(const TwoSampleDataset& input, int k, const InferenceConfig& config) {
  Prepared prep = prepare(input, config);
  if (k < 0 || k >= prep.data.dimension()) throw ValidationError("component index out of range");
  double eps = config.epsilon_grid.front();
  if (config.epsilon_grid.size() > 1) eps = confidence_interval_component(prep.data, k, config).epsilon_upper;

  auto theta_of = [&](const TwoSampleDataset& d) {
    const double b = tstsls(d, config.level).beta[k];
    const auto part = partition_with(d, config.min_cell_subsample, prep.cell_count);
    return std::vector<double>{b - support_function(part, k, 1, eps, config.optimizer).value};
  };
  const auto est = theta_of(prep.data);
  const auto draws = subsample_statistic(prep.data, est, theta_of, config);

  TestResult out;
  out.kind = TestKind::equality;
  out.epsilon = eps;
  out.auxiliary = Eigen::VectorXd::Constant(1, est[0]);
  out.statistic = std::sqrt(prep.n) * std::abs(est[0]);
  std::vector<double> abs_draws(draws.draws[0]);
  for (double& d : abs_draws) d = std::abs(d);
  out.critical_value = sample_quantile(abs_draws, 1.0 - config.alpha());
  out.reject = out.statistic > out.critical_value;
  const auto at_least = std::count_if(abs_draws.begin(), abs_draws.end(), [&](double v) { return v >= out.statistic; });
  out.p_value = static_cast<double>(at_least) / static_cast<double>(abs_draws.size());
  out.sizes = draws.sizes;
  out.replications = draws.replications;
  out.dropped = draws.dropped;
  return out;
}

}  // namespace combreg
