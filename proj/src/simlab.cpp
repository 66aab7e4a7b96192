#include "combreg/simlab.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "combreg/errors.hpp"
#include "combreg/parallel.hpp"

namespace combreg {

namespace {

constexpr std::size_t kReferenceSize = 1000000;
constexpr double kReferenceEpsilon = 1e-3;
constexpr std::uint64_t kReferenceSeed = 0x7265666572656e63ULL;

Eigen::MatrixXd matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

DgpSpec preset(const std::string& name) {
  DgpSpec s;
  s.name = name;
  if (name == "normal-p1") {
    s.family = "linear-normal";
    s.sigma = matrix({{2.25}});
    s.beta = Eigen::VectorXd::Constant(1, 1.0);
    s.u_scale = 1.0;
  } else if (name == "gamma-p1") {
    s.family = "linear-gamma";
    s.sigma = matrix({{4.0}});  // variance of Gamma(1, 2)
    s.beta = Eigen::VectorXd::Constant(1, 1.0);
    s.u_shape = 0.4;
    s.u_scale = 2.0;
  } else if (name == "normal-p2") {
    s.family = "linear-normal";
    s.dimension = 2;
    s.sigma = matrix({{1.0, -0.2}, {-0.2, 1.0}});
    s.beta = Eigen::Vector2d(1.0, 1.0);
    s.intercept = -0.1;
    s.u_scale = 2.0;
  } else if (name == "common-p1" || name == "common-p1-gamma0") {
    s.family = "binary-common";
    s.sigma = matrix({{1.0, 0.8}, {0.8, 1.5}});
    s.beta = Eigen::VectorXd::Constant(1, 1.0);
    s.gamma = name == "common-p1" ? 0.3 : 0.0;
    s.u_scale = 2.0;
  } else if (name == "illustration-a" || name == "illustration-b") {
    s.family = name;
    s.dimension = 2;
    s.sigma = matrix({{1.0, -0.3, -0.8}, {-0.3, 1.0, -0.1}, {-0.8, -0.1, 1.0}});
    s.beta = Eigen::Vector2d(1.0, 1.0);
    s.gamma = 0.3;
    s.intercept = -0.1;
    s.u_scale = 3.0;
  } else if (name == "validation-h0" || name == "validation-h1") {
    s.family = "validation";
    s.sigma = matrix({{1.0}});
    s.beta = Eigen::VectorXd::Constant(1, 1.0);
    s.u_scale = name == "validation-h0" ? 0.0 : 1.0;
    s.n_y = s.n_x = 2000;
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return s;
}

double standard_normal_cut(double p) { return normal_quantile(p); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

nlohmann::json DgpSpec::to_json() const {
  return {{"name", name},
          {"family", family},
          {"dimension", dimension},
          {"sigma", matrix_json(sigma)},
          {"beta", std::vector<double>(beta.data(), beta.data() + beta.size())},
          {"gamma", gamma},
          {"intercept", intercept},
          {"u_scale", u_scale},
          {"u_shape", u_shape},
          {"n_y", n_y},
          {"n_x", n_x}};
}

Dgp::Dgp(DgpSpec spec) : spec_(std::move(spec)) {
  if (spec_.beta.size() != spec_.dimension) throw ValidationError("beta length must equal the dimension");
  if (spec_.n_y < 2 || spec_.n_x < 2) throw ValidationError("sample sizes must be at least 2");
  Eigen::LLT<Eigen::MatrixXd> llt(spec_.sigma);
  if (llt.info() != Eigen::Success) throw ValidationError("sigma must be symmetric positive definite");
  chol_ = llt.matrixL();
  if (spec_.family == "binary-common") {
    cells_ = {{"0", 0.0}, {"1", 1.0}};
  } else if (spec_.family == "illustration-a" || spec_.family == "illustration-b") {
    for (double p : {0.1, 0.37, 0.67, 0.9}) cuts_.push_back(standard_normal_cut(p));
    for (int k = 0; k <= 4; ++k) cells_.push_back({std::to_string(k), static_cast<double>(k)});
  } else {
    cells_ = {{"all", 0.0}};
  }
}

Unit Dgp::draw_unit(Rng& rng) const {
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto& s = spec_;
  Unit u;
  auto noise = [&] {
    if (s.u_shape > 0.0) return std::gamma_distribution<double>(s.u_shape, s.u_scale)(rng);
    return s.u_scale * nd(rng);
  };
  const Eigen::Index m = chol_.rows();
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = nd(rng);
  const Eigen::VectorXd n = chol_ * z;
  if (s.family == "linear-normal" || s.family == "validation") {
    u.x = n;
    u.y = s.intercept + u.x.dot(s.beta) + noise();
  } else if (s.family == "linear-gamma") {
    u.x = Eigen::VectorXd::Constant(1, std::gamma_distribution<double>(1.0, 2.0)(rng));
    u.y = s.intercept + u.x.dot(s.beta) + noise();
  } else if (s.family == "binary-common") {
    u.cell = n[0] <= 0.3 ? 1 : 0;
    u.x = Eigen::VectorXd::Constant(1, n[1]);
    u.y = s.intercept + s.gamma * u.cell + u.x.dot(s.beta) + noise();
  } else {
    int c = 0;
    for (double cut : cuts_) c += n[0] > cut ? 1 : 0;
    u.cell = c;
    u.x = Eigen::Vector2d(s.family == "illustration-b" ? std::exp(n[1]) : n[1], std::exp(n[2]));
    u.y = s.intercept + s.gamma * std::pow(static_cast<double>(c), 1.3) + u.x.dot(s.beta) + noise();
  }
  return u;
}

TwoSampleDataset Dgp::draw(Rng& rng) const {
  TwoSampleDataset d;
  d.cells = cells_;
  for (int j = 0; j < spec_.dimension; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  d.y.reserve(spec_.n_y);
  d.y_cell.reserve(spec_.n_y);
  for (std::size_t i = 0; i < spec_.n_y; ++i) {
    const Unit u = draw_unit(rng);
    d.y.push_back(u.y);
    d.y_cell.push_back(u.cell);
  }
  d.x.resize(static_cast<Eigen::Index>(spec_.n_x), spec_.dimension);
  d.x_cell.reserve(spec_.n_x);
  for (std::size_t i = 0; i < spec_.n_x; ++i) {
    const Unit u = draw_unit(rng);
    d.x.row(static_cast<Eigen::Index>(i)) = u.x.transpose();
    d.x_cell.push_back(u.cell);
  }
  return d;
}

JointSample Dgp::draw_joint(Rng& rng, std::size_t n) const {
  JointSample j;
  j.y.reserve(n);
  j.x.resize(static_cast<Eigen::Index>(n), spec_.dimension);
  for (std::size_t i = 0; i < n; ++i) {
    const Unit u = draw_unit(rng);
    j.y.push_back(u.y);
    j.x.row(static_cast<Eigen::Index>(i)) = u.x.transpose();
  }
  return j;
}

std::optional<std::pair<double, Eigen::MatrixXd>> Dgp::gaussian_moments() const {
  if (spec_.family != "linear-normal" && spec_.family != "validation") return std::nullopt;
  if (spec_.u_scale <= 0.0) return std::nullopt;
  const double vy = spec_.beta.dot(spec_.sigma * spec_.beta) + spec_.u_scale * spec_.u_scale;
  return std::make_pair(vy, spec_.sigma);
}

std::vector<std::string> preset_names() {
  return {"normal-p1",      "gamma-p1",       "normal-p2",     "common-p1",    "common-p1-gamma0",
          "illustration-a", "illustration-b", "validation-h0", "validation-h1"};
}

Dgp make_dgp(const std::string& name, const nlohmann::json& overrides) {
  DgpSpec s = preset(name);
  if (!overrides.is_null() && !overrides.is_object()) throw ValidationError("overrides must be a JSON object");
  try {
    for (const auto& [key, v] : overrides.items()) {
      if (key == "beta") {
        if (v.is_number()) {
          s.beta = Eigen::VectorXd::Constant(s.dimension, v.get<double>());
        } else {
          const auto b = v.get<std::vector<double>>();
          if (static_cast<int>(b.size()) != s.dimension) throw ValidationError("beta override has the wrong length");
          s.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), s.dimension);
        }
      } else if (key == "gamma") {
        s.gamma = v.get<double>();
      } else if (key == "intercept") {
        s.intercept = v.get<double>();
      } else if (key == "n") {
        s.n_y = s.n_x = v.get<std::size_t>();
      } else if (key == "n_y") {
        s.n_y = v.get<std::size_t>();
      } else if (key == "n_x") {
        s.n_x = v.get<std::size_t>();
      } else {
        throw ValidationError("unknown override '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("overrides: ") + e.what());
  }
  return Dgp(std::move(s));
}

const char* to_string(McMethod method) {
  switch (method) {
    case McMethod::interval: return "interval";
    case McMethod::tstsls: return "tstsls";
    case McMethod::point_id: return "pointid";
  }
  return "interval";
}

nlohmann::json McConfig::to_json() const {
  return {{"method", to_string(method)},
          {"component", component + 1},
          {"constraints", constraints ? constraints->to_json() : nlohmann::json(nullptr)},
          {"epsilon_multiplier", epsilon_multiplier},
          {"sims", sims},
          {"seed", seed},
          {"inference", inference.to_json()}};
}

std::pair<double, double> reference_interval(const Dgp& dgp, int component,
                                             const std::optional<ConstraintSpec>& constraints) {
  const int p = dgp.spec().dimension;
  if (component < 0 || component >= p) throw ValidationError("component index out of range");
  const bool constrained = constraints && !constraints->empty();
  if (!constrained) {
    if (const auto m = dgp.gaussian_moments()) {
      const Ellipsoid e(m->second, m->first);
      const double s = e.support(Eigen::VectorXd::Unit(p, component));
      return {-s, s};
    }
  }

  static std::mutex mutex;
  static std::map<std::string, std::pair<double, double>> cache;
  const std::string key = dgp.spec().to_json().dump() + "|" + std::to_string(component) + "|" +
                          (constrained ? constraints->to_json().dump() : "");
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
  }

  DgpSpec big = dgp.spec();
  big.n_y = big.n_x = kReferenceSize;
  const Dgp large(big);
  Rng rng = make_stream(kReferenceSeed, 0);
  const TwoSampleDataset data = large.draw(rng);
  const CellPartition part = residualize(data);
  std::pair<double, double> out;
  if (constrained) {
    if (p != 1) throw ValidationError("constrained reference sets are available for p = 1 only");
    const auto cs = constrained_set(part, *constraints, sphere_grid(1, 2), kReferenceEpsilon);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i = 0; i < 2; ++i) {
      if (cs.set.empty[i]) continue;
      const double s = cs.set.directions[i][0];
      for (double lam : {cs.set.lower[i], cs.set.upper[i]}) {
        lo = std::min(lo, s * lam);
        hi = std::max(hi, s * lam);
      }
    }
    if (!(lo <= hi)) throw NumericalError("constrained reference set is empty");
    out = {lo, hi};
  } else {
    const auto iv = projection_interval(part, component, kReferenceEpsilon);
    out = {iv.lower, iv.upper};
  }
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, out);
  return out;
}

namespace {

struct SimOutcome {
  bool ok = false;
  double est_lo = 0.0;
  double est_hi = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool reject = false;
};

// Hull of the non-empty pieces {s * lambda : lower <= lambda <= upper} over s = -1, +1.
bool interval_from_star(const StarSet& set, double& lo, double& hi) {
  lo = INFINITY;
  hi = -INFINITY;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.empty[i]) continue;
    const double s = set.directions[i][0];
    for (double lam : {set.lower[i], set.upper[i]}) {
      lo = std::min(lo, s * lam);
      hi = std::max(hi, s * lam);
    }
  }
  return lo <= hi;
}

}  // namespace

McReport run_monte_carlo(const Dgp& dgp, const McConfig& config) {
  if (config.sims < 1) throw ValidationError("the number of simulations must be positive");
  config.inference.validate();
  const int p = dgp.spec().dimension;
  if (config.component < 0 || config.component >= p) throw ValidationError("component index out of range");
  const bool constrained = config.constraints && !config.constraints->empty();
  if (constrained && p != 1) throw ValidationError("constrained Monte Carlo runs support p = 1 only");

  McReport report;
  report.dgp = dgp.spec().name;
  report.dgp_spec = dgp.spec().to_json();
  report.method = config.to_json();
  report.sims = config.sims;
  report.seed = config.seed;

  std::pair<double, double> ref{0.0, 0.0};
  if (config.method == McMethod::interval) {
    ref = reference_interval(dgp, config.component, config.constraints);
  } else if (config.method == McMethod::tstsls) {
    ref = {dgp.spec().beta[config.component], dgp.spec().beta[config.component]};
  }

  const auto sims = static_cast<std::size_t>(config.sims);
  std::vector<SimOutcome> out(sims);
  parallel_for(sims, [&](std::size_t s) {
    Rng rng = make_stream(config.seed, s);
    InferenceConfig inf = config.inference;
    inf.seed = stream_seed(mix_seed(config.seed), s);
    SimOutcome& o = out[s];
    try {
      if (config.method == McMethod::point_id) {
        const JointSample j = dgp.draw_joint(rng, dgp.spec().n_y);
        o.reject = point_id_test(j.y, j.x, inf, config.epsilon_multiplier).reject;
        o.ok = true;
        return;
      }
      const TwoSampleDataset d = dgp.draw(rng);
      if (config.method == McMethod::tstsls) {
        const auto r = tstsls(d, inf.level);
        o.est_lo = o.est_hi = r.beta[config.component];
        o.ci_lo = r.ci_lower[config.component];
        o.ci_hi = r.ci_upper[config.component];
        o.ok = true;
      } else if (constrained) {
        const auto r = constrained_region(d, sphere_grid(1, 2), *config.constraints, inf);
        o.ok = interval_from_star(r.region, o.ci_lo, o.ci_hi) && interval_from_star(r.estimate, o.est_lo, o.est_hi);
      } else {
        const auto r = confidence_interval_component(d, config.component, inf);
        o.est_lo = r.estimate_lower;
        o.est_hi = r.estimate_upper;
        o.ci_lo = r.lower;
        o.ci_hi = r.upper;
        o.ok = true;
      }
    } catch (const std::exception&) {
      o.ok = false;
    }
  });

  std::size_t good = 0;
  std::size_t rejections = 0;
  McTarget t;
  t.name = "beta" + std::to_string(config.component + 1);
  t.reference_lower = ref.first;
  t.reference_upper = ref.second;
  std::size_t cover_lo = 0;
  std::size_t cover_hi = 0;
  double length = 0.0;
  for (const auto& o : out) {
    if (!o.ok) {
      ++report.failed;
      continue;
    }
    ++good;
    rejections += o.reject ? 1 : 0;
    t.estimate_lower += o.est_lo;
    t.estimate_upper += o.est_hi;
    t.ci_lower += o.ci_lo;
    t.ci_upper += o.ci_hi;
    length += o.ci_hi - o.ci_lo;
    cover_lo += (o.ci_lo <= ref.first && ref.first <= o.ci_hi) ? 1 : 0;
    cover_hi += (o.ci_lo <= ref.second && ref.second <= o.ci_hi) ? 1 : 0;
  }
  if (good == 0) throw NumericalError("every simulation failed");
  const double g = static_cast<double>(good);
  if (config.method == McMethod::point_id) {
    report.rejection_rate = static_cast<double>(rejections) / g;
    return report;
  }
  t.estimate_lower /= g;
  t.estimate_upper /= g;
  t.ci_lower /= g;
  t.ci_upper /= g;
  t.excess_length = length / g - (ref.second - ref.first);
  t.coverage_lower = static_cast<double>(cover_lo) / g;
  t.coverage_upper = static_cast<double>(cover_hi) / g;
  t.coverage = std::min(t.coverage_lower, t.coverage_upper);
  report.targets.push_back(t);
  return report;
}

nlohmann::json McReport::to_json() const {
  nlohmann::json targets_json = nlohmann::json::array();
  for (const auto& t : targets) {
    targets_json.push_back({{"name", t.name},
                            {"reference", {t.reference_lower, t.reference_upper}},
                            {"estimate", {t.estimate_lower, t.estimate_upper}},
                            {"ci", {t.ci_lower, t.ci_upper}},
                            {"excess_length", t.excess_length},
                            {"coverage", t.coverage},
                            {"coverage_lower", t.coverage_lower},
                            {"coverage_upper", t.coverage_upper}});
  }
  nlohmann::json j = {{"dgp", dgp},     {"dgp_spec", dgp_spec}, {"method", method},
                      {"sims", sims},   {"failed", failed},     {"seed", seed},
                      {"targets", targets_json}};
  j["rejection_rate"] = rejection_rate ? nlohmann::json(*rejection_rate) : nlohmann::json(nullptr);
  return j;
}

std::string McReport::to_csv() const {
  std::ostringstream os;
  if (rejection_rate) {
    os << "statistic,value\n";
    os << "rejection_rate," << fmt(*rejection_rate) << "\n";
    os << "sims," << sims << "\n";
    os << "failed," << failed << "\n";
    return os.str();
  }
  os << "target,reference_lower,reference_upper,estimate_lower,estimate_upper,ci_lower,ci_upper,"
        "excess_length,coverage,coverage_lower,coverage_upper\n";
  for (const auto& t : targets) {
    os << t.name << ',' << fmt(t.reference_lower) << ',' << fmt(t.reference_upper) << ',' << fmt(t.estimate_lower)
       << ',' << fmt(t.estimate_upper) << ',' << fmt(t.ci_lower) << ',' << fmt(t.ci_upper) << ','
       << fmt(t.excess_length) << ',' << fmt(t.coverage) << ',' << fmt(t.coverage_lower) << ','
       << fmt(t.coverage_upper) << "\n";
  }
  return os.str();
}

}  // namespace combreg
