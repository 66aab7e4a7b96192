#include "combreg/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "combreg/errors.hpp"
#include "combreg/parallel.hpp"

namespace combreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  if (begin < end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

double mean_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace

double TwoSampleDataset::effective_n() const {
  const double ny = static_cast<double>(n_y());
  const double nx = static_cast<double>(n_x());
  if (ny + nx == 0.0) return 0.0;
  return nx * ny / (nx + ny);
}

void TwoSampleDataset::validate() const {
  if (y.size() != y_cell.size()) throw ValidationError("outcome sample: cell column length mismatch");
  if (static_cast<std::size_t>(x.rows()) != x_cell.size()) {
    throw ValidationError("covariate sample: cell column length mismatch");
  }
  if (y.empty() || x.rows() == 0) throw ValidationError("both samples need at least one row");
  if (x.cols() < 1) throw ValidationError("at least one non-common covariate is required");
  const int k = static_cast<int>(cells.size());
  for (int c : y_cell) {
    if (c < 0 || c >= k) throw ValidationError("outcome sample: cell index out of range");
  }
  for (int c : x_cell) {
    if (c < 0 || c >= k) throw ValidationError("covariate sample: cell index out of range");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("outcome sample contains a non-finite value");
  }
  if (!x.allFinite()) throw ValidationError("covariate sample contains a non-finite value");
}

TwoSampleDataset TwoSampleDataset::without_common(std::vector<double> y, Eigen::MatrixXd x) {
  TwoSampleDataset d;
  d.y_cell.assign(y.size(), 0);
  d.x_cell.assign(static_cast<std::size_t>(x.rows()), 0);
  d.y = std::move(y);
  d.x = std::move(x);
  d.cells = {CellInfo{"all", 0.0}};
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  return d;
}

TwoSampleDataset TwoSampleDataset::subset(const std::vector<std::size_t>& y_rows,
                                          const std::vector<std::size_t>& x_rows) const {
  TwoSampleDataset d;
  d.cells = cells;
  d.covariate_names = covariate_names;
  d.y.reserve(y_rows.size());
  d.y_cell.reserve(y_rows.size());
  for (std::size_t i : y_rows) {
    d.y.push_back(y[i]);
    d.y_cell.push_back(y_cell[i]);
  }
  d.x.resize(static_cast<Eigen::Index>(x_rows.size()), x.cols());
  d.x_cell.reserve(x_rows.size());
  for (std::size_t r = 0; r < x_rows.size(); ++r) {
    d.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(x_rows[r]));
    d.x_cell.push_back(x_cell[x_rows[r]]);
  }
  return d;
}

std::vector<CellInfo> order_cells(const std::vector<std::string>& labels) {
  std::set<std::string> unique(labels.begin(), labels.end());
  std::vector<CellInfo> out;
  bool all_numeric = true;
  for (const auto& l : unique) {
    const auto v = parse_number(l);
    if (!v) all_numeric = false;
    out.push_back(CellInfo{l, v ? *v : std::numeric_limits<double>::quiet_NaN()});
  }
  if (all_numeric) {
    std::stable_sort(out.begin(), out.end(), [](const CellInfo& a, const CellInfo& b) { return a.numeric < b.numeric; });
  }
  return out;
}

CellPartition residualize(const TwoSampleDataset& data, std::size_t min_cell) {
  data.validate();
  const std::size_t k = data.cells.size();
  const int p = data.dimension();
  std::vector<std::vector<double>> ys(k);
  std::vector<std::vector<Eigen::Index>> xs(k);
  for (std::size_t i = 0; i < data.y.size(); ++i) ys[static_cast<std::size_t>(data.y_cell[i])].push_back(data.y[i]);
  for (std::size_t i = 0; i < data.x_cell.size(); ++i) {
    xs[static_cast<std::size_t>(data.x_cell[i])].push_back(static_cast<Eigen::Index>(i));
  }

  CellPartition part;
  part.dimension_ = p;
  std::size_t ny_total = 0;
  std::size_t nx_total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t ny = ys[c].size();
    const std::size_t nx = xs[c].size();
    if (ny == 0 && nx == 0) continue;
    if (ny == 0 || nx == 0) {
      part.excluded_.push_back({data.cells[c].label, ny, nx, ny == 0 ? "absent from outcome sample" : "absent from covariate sample"});
      continue;
    }
    if (ny < min_cell || nx < min_cell) {
      part.excluded_.push_back({data.cells[c].label, ny, nx, "fewer than " + std::to_string(min_cell) + " rows"});
      continue;
    }
    Eigen::MatrixXd cx(static_cast<Eigen::Index>(nx), p);
    for (std::size_t r = 0; r < nx; ++r) cx.row(static_cast<Eigen::Index>(r)) = data.x.row(xs[c][r]);
    EmpiricalDist yd = EmpiricalDist::from_sample(ys[c]).centered();
    std::optional<SuperquantileCurve> curve;
    if (!yd.degenerate()) curve.emplace(yd);
    part.cells_.push_back(CellPartition::Cell{static_cast<int>(c), data.cells[c], std::move(yd), std::move(curve),
                                              std::move(cx), ny, nx});
    ny_total += ny;
    nx_total += nx;
  }
  if (part.cells_.empty()) throw ValidationError("no common-regressor cell has enough rows in both samples");
  part.effective_n_ = static_cast<double>(nx_total) * static_cast<double>(ny_total) /
                      static_cast<double>(nx_total + ny_total);

  // Moments over retained cells.
  ConditionalMoments& m = part.moments_;
  m.pooled_within_cov = Eigen::MatrixXd::Zero(p, p);
  std::vector<double> all_y;
  for (const auto& cell : part.cells_) {
    const auto c = static_cast<std::size_t>(cell.dataset_index);
    m.m_y.push_back(mean_sorted(ys[c]));
    m.p_y.push_back(static_cast<double>(cell.n_y) / static_cast<double>(ny_total));
    m.p_x.push_back(static_cast<double>(cell.n_x) / static_cast<double>(nx_total));
    Eigen::VectorXd mx(p);
    for (int j = 0; j < p; ++j) {
      std::vector<double> col(cell.x.col(j).data(), cell.x.col(j).data() + cell.x.rows());
      mx[j] = mean_sorted(std::move(col));
    }
    m.m_x.push_back(mx);
    const Eigen::MatrixXd centered = cell.x.rowwise() - mx.transpose();
    m.pooled_within_cov += m.p_x.back() * (centered.transpose() * centered) / static_cast<double>(cell.n_x);
    all_y.insert(all_y.end(), ys[c].begin(), ys[c].end());
  }
  const double ybar = mean_sorted(all_y);
  long double vy = 0.0L;
  for (double v : all_y) vy += (v - ybar) * (v - ybar);
  m.var_y = static_cast<double>(vy / static_cast<long double>(all_y.size()));
  long double between = 0.0L;
  for (std::size_t i = 0; i < m.m_y.size(); ++i) between += m.p_y[i] * (m.m_y[i] - ybar) * (m.m_y[i] - ybar);
  m.r2_short = m.var_y > 0.0 ? std::clamp(static_cast<double>(between) / m.var_y, 0.0, 1.0) : 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.pooled_within_cov, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1e-300, eig.eigenvalues().maxCoeff()))) {
    throw NumericalError("pooled within-cell covariance of the covariates is singular");
  }
  return part;
}

RadialValue CellPartition::evaluate_cell(std::size_t c, const Eigen::VectorXd& q, double epsilon) const {
  const Cell& cell = cells_.at(c);
  if (q.size() != dimension_) throw ValidationError("direction dimension does not match covariates");
  RadialValue out;
  out.direction = q;
  out.epsilon = epsilon;
  out.cell = static_cast<int>(c);
  const Eigen::VectorXd proj = cell.x * q;
  const EmpiricalDist g =
      EmpiricalDist::from_sample(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size()))).centered();
  if (g.degenerate()) {
    out.value = kInf;
    return out;
  }
  if (!cell.y_curve) {
    out.value = 0.0;
    out.argmin_alpha = epsilon > 0.0 ? epsilon : 0.5;
    return out;
  }
  RadialValue r = radial_value(*cell.y_curve, g, epsilon);
  r.direction = q;
  r.cell = static_cast<int>(c);
  return r;
}

RadialValue CellPartition::evaluate(const Eigen::VectorXd& q, double epsilon) const {
  if (q.norm() == 0.0) {
    RadialValue r;
    r.direction = q;
    r.epsilon = epsilon;
    r.value = kInf;
    return r;
  }
  RadialValue best;
  best.value = kInf;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    RadialValue r = evaluate_cell(c, q, epsilon);
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) {
    throw ValidationError("covariate index is constant within every cell in this direction");
  }
  return best;
}

FSet f_set(const CellPartition& partition, const StarSet& beta_set) {
  if (beta_set.size() == 0 || beta_set.all_empty()) throw ValidationError("f set: the coefficient set is empty");
  const auto& m = partition.moments();
  std::vector<Eigen::VectorXd> points;
  for (std::size_t i = 0; i < beta_set.size(); ++i) {
    if (beta_set.empty[i]) continue;
    for (double lam : {beta_set.lower[i], beta_set.upper[i]}) {
      if (!std::isfinite(lam)) throw ValidationError("f set: the coefficient set is unbounded");
      points.push_back(lam * beta_set.directions[i]);
    }
  }
  const std::size_t k = partition.cells().size();
  FSet out;
  out.f_lower.assign(k, kInf);
  out.f_upper.assign(k, -kInf);
  for (std::size_t c = 0; c < k; ++c) {
    out.cell_labels.push_back(partition.cells()[c].info.label);
    for (const auto& b : points) {
      const double f = m.m_y[c] - m.m_x[c].dot(b);
      out.f_lower[c] = std::min(out.f_lower[c], f);
      out.f_upper[c] = std::max(out.f_upper[c], f);
    }
  }
  for (std::size_t c = 1; c < k; ++c) {
    out.gamma_labels.push_back(partition.cells()[c].info.label);
    double lo = kInf;
    double hi = -kInf;
    for (const auto& b : points) {
      const double g = (m.m_y[c] - m.m_y[0]) - (m.m_x[c] - m.m_x[0]).dot(b);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    out.gamma_lower.push_back(lo);
    out.gamma_upper.push_back(hi);
  }
  return out;
}

InteractionSource::InteractionSource(const CellPartition& partition, std::vector<double> x1)
    : partition_(partition), x1_(std::move(x1)) {
  if (x1_.empty()) {
    for (const auto& c : partition_.cells()) x1_.push_back(c.info.numeric);
  }
  if (x1_.size() != partition_.cells().size()) {
    throw ValidationError("interaction: one X_{1,c} value per retained cell is required");
  }
  std::set<double> distinct;
  for (double v : x1_) {
    if (!std::isfinite(v)) throw ValidationError("interaction: cell values must be numeric");
    distinct.insert(v);
  }
  if (distinct.size() < 2) throw ValidationError("interaction: X_{1,c} needs at least two support points");
}

RadialValue InteractionSource::evaluate(const Eigen::VectorXd& q, double epsilon) const {
  const int p = partition_.dimension();
  if (q.size() != p + 1) throw ValidationError("interaction: direction must have dimension p + 1");
  RadialValue best;
  best.direction = q;
  best.epsilon = epsilon;
  best.value = kInf;
  for (std::size_t c = 0; c < x1_.size(); ++c) {
    Eigen::VectorXd shifted = q.tail(p);
    shifted[0] += x1_[c] * q[0];
    if (shifted.norm() == 0.0) continue;  // this cell places no restriction
    RadialValue r = partition_.evaluate_cell(c, shifted, epsilon);
    if (r.value < best.value) {
      best.value = r.value;
      best.argmin_alpha = r.argmin_alpha;
      best.cell = static_cast<int>(c);
    }
  }
  if (!std::isfinite(best.value) && q.norm() > 0.0) {
    // Only reachable when every cell is unrestricted in this direction.
    throw ValidationError("interaction: direction is unrestricted in every cell");
  }
  return best;
}

double short_r2(const TwoSampleDataset& data) {
  data.validate();
  std::map<int, std::vector<double>> by_cell;
  for (std::size_t i = 0; i < data.y.size(); ++i) by_cell[data.y_cell[i]].push_back(data.y[i]);
  const double ybar = mean_sorted(data.y);
  long double total = 0.0L;
  for (double v : data.y) total += (v - ybar) * (v - ybar);
  if (!(total > 0.0L)) throw ValidationError("short R^2: outcome has zero variance");
  long double between = 0.0L;
  for (const auto& [cell, vals] : by_cell) {
    const double mc = mean_sorted(vals);
    between += static_cast<long double>(vals.size()) * (mc - ybar) * (mc - ybar);
  }
  return std::clamp(static_cast<double>(between / total), 0.0, 1.0);
}

}  // namespace combreg
