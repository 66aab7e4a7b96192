#include "combreg/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "combreg/errors.hpp"
#include "combreg/parallel.hpp"

namespace combreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int parse_sign(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ValidationError("constraints: sign for '" + key + "' must be \"+\" or \"-\"");
  const auto s = v.get<std::string>();
  if (s == "+") return 1;
  if (s == "-") return -1;
  throw ValidationError("constraints: sign for '" + key + "' must be \"+\" or \"-\"");
}

std::vector<double> cell_spacing(const std::vector<CellInfo>& cells) {
  const bool numeric = std::all_of(cells.begin(), cells.end(), [](const CellInfo& c) { return std::isfinite(c.numeric); });
  std::vector<double> pos(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) pos[i] = numeric ? cells[i].numeric : static_cast<double>(i);
  return pos;
}

}  // namespace

const char* to_string(RowKind kind) {
  switch (kind) {
    case RowKind::monotone: return "monotone";
    case RowKind::convex: return "convex";
    case RowKind::exclusion: return "exclusion";
    case RowKind::custom: return "custom";
    case RowKind::sign: return "sign";
  }
  return "custom";
}

ShapeOperator build_shape_operator(ShapeKind kind, const std::vector<CellInfo>& cells, double cbar) {
  const std::size_t k = cells.size();
  ShapeOperator op;
  switch (kind) {
    case ShapeKind::monotone:
      if (k < 2) throw ValidationError("monotonicity needs at least two cells");
      for (std::size_t r = 0; r + 1 < k; ++r) {
        ShapeRow row{std::vector<double>(k, 0.0), 0.0, RowKind::monotone};
        row.coef[r] = -1.0;
        row.coef[r + 1] = 1.0;
        op.rows.push_back(std::move(row));
      }
      break;
    case ShapeKind::convex: {
      if (k < 3) throw ValidationError("convexity needs at least three cells");
      const auto x = cell_spacing(cells);
      for (std::size_t r = 0; r + 2 < k; ++r) {
        const double h1 = x[r + 1] - x[r];
        const double h2 = x[r + 2] - x[r + 1];
        if (!(h1 > 0.0 && h2 > 0.0)) throw ValidationError("convexity needs strictly increasing cell values");
        ShapeRow row{std::vector<double>(k, 0.0), 0.0, RowKind::convex};
        row.coef[r] = 1.0 / h1;
        row.coef[r + 1] = -1.0 / h1 - 1.0 / h2;
        row.coef[r + 2] = 1.0 / h2;
        op.rows.push_back(std::move(row));
      }
      break;
    }
    case ShapeKind::exclusion:
      if (k < 2) throw ValidationError("exclusion restriction needs at least two cells");
      if (!(cbar >= 0.0)) throw ValidationError("exclusion bound must be nonnegative");
      for (std::size_t r = 0; r + 1 < k; ++r) {
        for (double s : {1.0, -1.0}) {
          ShapeRow row{std::vector<double>(k, 0.0), -cbar, RowKind::exclusion};
          row.coef[r] = -s;
          row.coef[r + 1] = s;
          op.rows.push_back(std::move(row));
        }
      }
      break;
  }
  return op;
}

ShapeBounds shape_bounds(const ConditionalMoments& moments, const ShapeOperator& op, const Eigen::VectorXd& q) {
  ShapeBounds out;
  for (const auto& row : op.rows) {
    if (row.coef.size() != moments.m_y.size()) throw ValidationError("shape row does not match the retained cells");
    long double a = -static_cast<long double>(row.lower_bound);
    long double b = 0.0L;
    for (std::size_t c = 0; c < row.coef.size(); ++c) {
      if (row.coef[c] == 0.0) continue;
      a += static_cast<long double>(row.coef[c]) * moments.m_y[c];
      b += static_cast<long double>(row.coef[c]) * moments.m_x[c].dot(q);
    }
    if (b > 0.0L) {
      out.upper = std::min(out.upper, static_cast<double>(a / b));
    } else if (b < 0.0L) {
      out.lower = std::max(out.lower, static_cast<double>(a / b));
    } else if (a < 0.0L) {
      out.lower = kInf;
      out.upper = -kInf;
    } else if (a == 0.0L) {
      out.knife_edge = true;
    }
  }
  return out;
}

R2Bound r2_lower_bound(const ConditionalMoments& moments, double r2_lower, const Eigen::VectorXd& q) {
  const double quad = q.dot(moments.pooled_within_cov * q);
  if (!(quad > 0.0)) throw NumericalError("R^2 bound: within-cell covariance is not positive in this direction");
  R2Bound out;
  const double gap = r2_lower - moments.r2_short;
  out.clamped = gap < 0.0;
  out.value = std::sqrt(std::max(0.0, gap) * moments.var_y / quad);
  return out;
}

bool ConstraintSpec::empty() const {
  return !shape && custom_rows.empty() && !r2_lower && !r2_relative && signs.beta.empty() && signs.gamma.empty();
}

ConstraintSpec ConstraintSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("constraints: top level must be an object");
  ConstraintSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "shape") {
      if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "monotone") spec.shape = ShapeKind::monotone;
        else if (s == "convex") spec.shape = ShapeKind::convex;
        else throw ValidationError("constraints: unknown shape '" + s + "'");
      } else if (value.is_object() && value.contains("exclusion")) {
        if (!value["exclusion"].is_number()) throw ValidationError("constraints: exclusion bound must be a number");
        spec.shape = ShapeKind::exclusion;
        spec.exclusion_cbar = value["exclusion"].get<double>();
        if (!(spec.exclusion_cbar >= 0.0)) throw ValidationError("constraints: exclusion bound must be nonnegative");
      } else if (value.is_array()) {
        for (const auto& row : value) {
          if (!row.is_object() || !row.contains("coef") || !row["coef"].is_object()) {
            throw ValidationError("constraints: custom rows need a \"coef\" object");
          }
          std::map<std::string, double> coef;
          for (const auto& [label, c] : row["coef"].items()) {
            if (!c.is_number()) throw ValidationError("constraints: custom coefficients must be numbers");
            coef[label] = c.get<double>();
          }
          const double lower = row.value("lower", 0.0);
          spec.custom_rows.emplace_back(std::move(coef), lower);
        }
      } else {
        throw ValidationError("constraints: unrecognized \"shape\" value");
      }
    } else if (key == "r2_lower") {
      if (value.is_number()) {
        spec.r2_lower = value.get<double>();
        if (!(*spec.r2_lower >= 0.0 && *spec.r2_lower <= 1.0)) throw ValidationError("constraints: r2_lower must lie in [0, 1]");
      } else if (value.is_object() && value.contains("relative") && value["relative"].is_number()) {
        spec.r2_relative = value["relative"].get<double>();
        if (!(*spec.r2_relative >= 0.0)) throw ValidationError("constraints: relative R^2 factor must be nonnegative");
      } else {
        throw ValidationError("constraints: r2_lower must be a number or {\"relative\": r}");
      }
    } else if (key == "signs") {
      if (!value.is_object()) throw ValidationError("constraints: \"signs\" must be an object");
      for (const auto& [name, s] : value.items()) {
        const int sign = parse_sign(s, name);
        if (name.rfind("beta", 0) == 0) {
          int idx = 0;
          try {
            idx = std::stoi(name.substr(4));
          } catch (const std::exception&) {
            throw ValidationError("constraints: sign key '" + name + "' must look like beta1, beta2, ...");
          }
          if (idx < 1) throw ValidationError("constraints: beta components are numbered from 1");
          spec.signs.beta[idx - 1] = sign;
        } else if (name == "gamma") {
          spec.signs.gamma["*"] = sign;
        } else if (name.rfind("gamma:", 0) == 0) {
          spec.signs.gamma[name.substr(6)] = sign;
        } else {
          throw ValidationError("constraints: unknown sign key '" + name + "'");
        }
      }
    } else {
      throw ValidationError("constraints: unknown key '" + key + "'");
    }
  }
  return spec;
}

nlohmann::json ConstraintSpec::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (shape) {
    switch (*shape) {
      case ShapeKind::monotone: j["shape"] = "monotone"; break;
      case ShapeKind::convex: j["shape"] = "convex"; break;
      case ShapeKind::exclusion: j["shape"] = {{"exclusion", exclusion_cbar}}; break;
    }
  } else if (!custom_rows.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [coef, lower] : custom_rows) rows.push_back({{"coef", coef}, {"lower", lower}});
    j["shape"] = rows;
  }
  if (r2_lower) j["r2_lower"] = *r2_lower;
  if (r2_relative) j["r2_lower"] = {{"relative", *r2_relative}};
  if (!signs.beta.empty() || !signs.gamma.empty()) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : signs.beta) s["beta" + std::to_string(k + 1)] = v > 0 ? "+" : "-";
    for (const auto& [k, v] : signs.gamma) s[k == "*" ? std::string("gamma") : "gamma:" + k] = v > 0 ? "+" : "-";
    j["signs"] = s;
  }
  return j;
}

ShapeOperator shape_rows(const ConstraintSpec& spec, const CellPartition& partition) {
  std::vector<CellInfo> cells;
  for (const auto& c : partition.cells()) cells.push_back(c.info);
  const std::size_t k = cells.size();
  ShapeOperator op;
  if (spec.shape) op = build_shape_operator(*spec.shape, cells, spec.exclusion_cbar);
  auto position = [&](const std::string& label) -> std::size_t {
    for (std::size_t i = 0; i < k; ++i) {
      if (cells[i].label == label) return i;
    }
    throw ValidationError("constraints: cell '" + label + "' is not among the retained cells");
  };
  for (const auto& [coef, lower] : spec.custom_rows) {
    ShapeRow row{std::vector<double>(k, 0.0), lower, RowKind::custom};
    for (const auto& [label, c] : coef) row.coef[position(label)] += c;
    op.rows.push_back(std::move(row));
  }
  for (const auto& [label, sign] : spec.signs.gamma) {
    if (k < 2) throw ValidationError("constraints: gamma signs need at least two retained cells");
    std::vector<std::size_t> targets;
    if (label == "*") {
      for (std::size_t i = 1; i < k; ++i) targets.push_back(i);
    } else {
      const std::size_t pos = position(label);
      if (pos == 0) throw ValidationError("constraints: cell '" + label + "' is the reference cell");
      targets.push_back(pos);
    }
    for (std::size_t t : targets) {
      ShapeRow row{std::vector<double>(k, 0.0), 0.0, RowKind::sign};
      row.coef[t] = sign;
      row.coef[0] = -sign;
      op.rows.push_back(std::move(row));
    }
  }
  return op;
}

std::optional<double> effective_r2_lower(const ConstraintSpec& spec, const ConditionalMoments& moments) {
  if (spec.r2_lower) return spec.r2_lower;
  if (spec.r2_relative) return std::min(1.0, *spec.r2_relative * moments.r2_short);
  return std::nullopt;
}

DirectionBounds constraint_bounds(const ConstraintSpec& spec, const ShapeOperator& op, const CellPartition& partition,
                                  const Eigen::VectorXd& q) {
  DirectionBounds out;
  const auto& m = partition.moments();
  if (!op.empty()) {
    const ShapeBounds sb = shape_bounds(m, op, q);
    out.lower = std::max(out.lower, sb.lower);
    out.upper = std::min(out.upper, sb.upper);
    out.knife_edge = sb.knife_edge;
  }
  if (const auto r2 = effective_r2_lower(spec, m)) {
    const R2Bound rb = r2_lower_bound(m, *r2, q);
    out.lower = std::max(out.lower, rb.value);
    out.r2_clamped = rb.clamped;
  }
  for (const auto& [k, sign] : spec.signs.beta) {
    if (k >= q.size()) throw ValidationError("constraints: beta sign refers to a missing component");
    if (q[k] * sign < 0.0) out.upper = std::min(out.upper, 0.0);
  }
  return out;
}

StarSet combine(const StarSet& base, const std::vector<DirectionBounds>& bounds) {
  if (bounds.size() != base.size()) throw ValidationError("combine: bounds must match the direction grid");
  StarSet out = base;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.lower[i] = std::max({out.lower[i], bounds[i].lower, 0.0});
    out.upper[i] = std::min(out.upper[i], bounds[i].upper);
    out.empty[i] = out.empty[i] || !(out.lower[i] <= out.upper[i]);
  }
  out.compute_hull();
  return out;
}

ConstrainedSet constrained_set(const CellPartition& partition, const ConstraintSpec& spec,
                               const std::vector<Eigen::VectorXd>& directions, double epsilon) {
  ConstrainedSet out;
  const StarSet base = radial_set(partition, directions, epsilon);
  if (spec.empty()) {
    out.set = base;
    return out;
  }
  const ShapeOperator op = shape_rows(spec, partition);
  std::vector<DirectionBounds> bounds(directions.size());
  parallel_for(directions.size(), [&](std::size_t i) { bounds[i] = constraint_bounds(spec, op, partition, directions[i]); });
  out.set = combine(base, bounds);
  const bool knife = std::any_of(bounds.begin(), bounds.end(), [](const DirectionBounds& b) { return b.knife_edge; });
  const bool clamped = std::any_of(bounds.begin(), bounds.end(), [](const DirectionBounds& b) { return b.r2_clamped; });
  if (knife) out.warnings.push_back("a shape row has zero slope and zero slack in some direction; plug-in bound may be inconsistent");
  if (clamped) out.warnings.push_back("R^2 lower bound is below the short-regression R^2 and does not bind");
  if (out.set.all_empty()) out.warnings.push_back("constrained identified set is empty");
  return out;
}

}  // namespace combreg
