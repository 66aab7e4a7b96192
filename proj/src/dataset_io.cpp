#include "combreg/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "combreg/errors.hpp"

namespace combreg {

namespace {

constexpr char kKeySeparator = '|';

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_disjoint(const ColumnRoles& roles) {
  std::set<std::string> seen;
  auto add = [&](const std::string& c, const char* role) {
    if (!seen.insert(c).second) throw ValidationError("column '" + c + "' is assigned to more than one role (" + role + ")");
  };
  if (!roles.outcome.empty()) add(roles.outcome, "outcome");
  for (const auto& c : roles.common) add(c, "common");
  for (const auto& c : roles.not_common) add(c, "not common");
}

std::string cell_key(const std::vector<std::string>& row, const std::vector<std::size_t>& cols, bool& missing) {
  std::string key;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& v = row[cols[i]];
    if (is_missing(v)) missing = true;
    if (i > 0) key += kKeySeparator;
    key += v;
  }
  return key;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (records.empty()) throw ValidationError("CSV input has no header");

  CsvTable t;
  t.header = std::move(records.front());
  for (auto& h : t.header) h = std::string(trim(h));
  std::set<std::string> unique(t.header.begin(), t.header.end());
  if (unique.size() != t.header.size()) throw ValidationError("duplicate column names in CSV header");
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

CsvTable read_csv(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_csv(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::optional<double> parse_number(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

nlohmann::json ColumnRoles::to_json() const {
  return {{"outcome", outcome}, {"common", common}, {"not_common", not_common}};
}

nlohmann::json LoadSummary::to_json() const {
  return {{"outcome_rows", outcome_rows},
          {"covariate_rows", covariate_rows},
          {"outcome_dropped", outcome_dropped},
          {"covariate_dropped", covariate_dropped},
          {"outcome_unmatched", outcome_unmatched},
          {"covariate_unmatched", covariate_unmatched},
          {"warnings", warnings}};
}

LoadedDataset build_dataset(const CsvTable& outcome, const CsvTable& covariates, ColumnRoles roles) {
  const std::set<std::string> common_set(roles.common.begin(), roles.common.end());
  if (roles.outcome.empty()) {
    std::vector<std::string> candidates;
    for (const auto& h : outcome.header) {
      if (!common_set.count(h)) candidates.push_back(h);
    }
    if (candidates.size() != 1) throw ValidationError("outcome column is ambiguous; name it explicitly");
    roles.outcome = candidates.front();
  }
  if (roles.not_common.empty()) {
    for (const auto& h : covariates.header) {
      if (!common_set.count(h)) roles.not_common.push_back(h);
    }
    if (roles.not_common.empty()) throw ValidationError("covariate file has no non-common regressor column");
  }
  require_disjoint(roles);

  const std::size_t y_col = outcome.column(roles.outcome);
  std::vector<std::size_t> yc_cols;
  std::vector<std::size_t> xc_cols;
  for (const auto& c : roles.common) {
    yc_cols.push_back(outcome.column(c));
    xc_cols.push_back(covariates.column(c));
  }
  std::vector<std::size_t> x_cols;
  for (const auto& c : roles.not_common) x_cols.push_back(covariates.column(c));

  LoadedDataset out;
  LoadSummary& sum = out.summary;
  sum.outcome_rows = outcome.rows.size();
  sum.covariate_rows = covariates.rows.size();

  std::vector<std::pair<double, std::string>> ys;
  for (const auto& row : outcome.rows) {
    if (row.size() != outcome.header.size()) {
      ++sum.outcome_dropped;
      continue;
    }
    bool missing = false;
    std::string key = cell_key(row, yc_cols, missing);
    const auto y = parse_number(row[y_col]);
    if (missing || !y) {
      ++sum.outcome_dropped;
      continue;
    }
    ys.emplace_back(*y, std::move(key));
  }
  std::vector<std::pair<std::vector<double>, std::string>> xs;
  for (const auto& row : covariates.rows) {
    if (row.size() != covariates.header.size()) {
      ++sum.covariate_dropped;
      continue;
    }
    bool missing = false;
    std::string key = cell_key(row, xc_cols, missing);
    std::vector<double> v;
    for (std::size_t c : x_cols) {
      const auto x = parse_number(row[c]);
      if (!x) {
        missing = true;
        break;
      }
      v.push_back(*x);
    }
    if (missing) {
      ++sum.covariate_dropped;
      continue;
    }
    xs.emplace_back(std::move(v), std::move(key));
  }
  if (sum.outcome_dropped > 0) {
    sum.warnings.push_back(std::to_string(sum.outcome_dropped) + " outcome rows dropped (missing or invalid values)");
  }
  if (sum.covariate_dropped > 0) {
    sum.warnings.push_back(std::to_string(sum.covariate_dropped) + " covariate rows dropped (missing or invalid values)");
  }
  if (ys.empty()) throw ValidationError("outcome file has no usable rows");
  if (xs.empty()) throw ValidationError("covariate file has no usable rows");

  std::map<std::string, std::size_t> y_count;
  std::map<std::string, std::size_t> x_count;
  for (const auto& [y, k] : ys) ++y_count[k];
  for (const auto& [x, k] : xs) ++x_count[k];
  std::vector<std::string> shared;
  for (const auto& [k, n] : y_count) {
    if (x_count.count(k)) {
      shared.push_back(k);
    } else {
      sum.outcome_unmatched += n;
      sum.warnings.push_back("common-regressor value '" + k + "' appears only in the outcome file; " +
                             std::to_string(n) + " rows excluded");
    }
  }
  for (const auto& [k, n] : x_count) {
    if (!y_count.count(k)) {
      sum.covariate_unmatched += n;
      sum.warnings.push_back("common-regressor value '" + k + "' appears only in the covariate file; " +
                             std::to_string(n) + " rows excluded");
    }
  }
  if (shared.empty()) throw ValidationError("no common-regressor value is shared by the two files");

  TwoSampleDataset& d = out.data;
  d.cells = roles.common.empty() ? std::vector<CellInfo>{{"all", 0.0}} : order_cells(shared);
  std::map<std::string, int> index;
  if (roles.common.empty()) {
    index[""] = 0;
  } else {
    for (std::size_t i = 0; i < d.cells.size(); ++i) index[d.cells[i].label] = static_cast<int>(i);
  }
  for (const auto& [y, k] : ys) {
    const auto it = index.find(k);
    if (it == index.end()) continue;
    d.y.push_back(y);
    d.y_cell.push_back(it->second);
  }
  std::size_t kept = 0;
  for (const auto& [x, k] : xs) kept += index.count(k);
  const auto p = static_cast<Eigen::Index>(x_cols.size());
  d.x.resize(static_cast<Eigen::Index>(kept), p);
  Eigen::Index r = 0;
  for (const auto& [x, k] : xs) {
    const auto it = index.find(k);
    if (it == index.end()) continue;
    for (Eigen::Index j = 0; j < p; ++j) d.x(r, j) = x[static_cast<std::size_t>(j)];
    d.x_cell.push_back(it->second);
    ++r;
  }
  d.covariate_names = roles.not_common;
  d.validate();
  return out;
}

LoadedDataset load_dataset(const std::string& outcome_csv, const std::string& covariate_csv,
                           const ColumnRoles& roles) {
  return build_dataset(read_csv(outcome_csv), read_csv(covariate_csv), roles);
}

LoadedDataset load_split_dataset(const std::string& csv, const std::string& split_column, const ColumnRoles& roles) {
  const CsvTable all = read_csv(csv);
  const std::size_t split = all.column(split_column);
  CsvTable outcome;
  CsvTable covariates;
  for (std::size_t c = 0; c < all.header.size(); ++c) {
    if (c == split) continue;
    outcome.header.push_back(all.header[c]);
  }
  covariates.header = outcome.header;
  std::size_t bad = 0;
  for (const auto& row : all.rows) {
    if (row.size() != all.header.size()) {
      ++bad;
      continue;
    }
    std::vector<std::string> rest;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != split) rest.push_back(row[c]);
    }
    const std::string_view tag = trim(row[split]);
    if (tag == "outcome") {
      outcome.rows.push_back(std::move(rest));
    } else if (tag == "covariates") {
      covariates.rows.push_back(std::move(rest));
    } else {
      ++bad;
    }
  }
  // Columns of the other sample are blank in single-file mode; keep only the roles each sample needs.
  ColumnRoles r = roles;
  if (r.outcome.empty() || r.not_common.empty()) {
    throw ValidationError("single-file mode needs the outcome and non-common regressor columns named");
  }
  auto project = [](const CsvTable& t, const std::vector<std::string>& cols) {
    CsvTable p;
    p.header = cols;
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(t.column(c));
    for (const auto& row : t.rows) {
      std::vector<std::string> v;
      for (std::size_t i : idx) v.push_back(row[i]);
      p.rows.push_back(std::move(v));
    }
    return p;
  };
  std::vector<std::string> y_cols{r.outcome};
  std::vector<std::string> x_cols = r.not_common;
  for (const auto& c : r.common) {
    y_cols.push_back(c);
    x_cols.push_back(c);
  }
  LoadedDataset out = build_dataset(project(outcome, y_cols), project(covariates, x_cols), r);
  if (bad > 0) {
    out.summary.warnings.push_back(std::to_string(bad) + " rows dropped (missing or unknown value in '" + split_column + "')");
  }
  return out;
}

JointData load_joint(const std::string& csv, const std::string& outcome, const std::vector<std::string>& covariates) {
  if (covariates.empty()) throw ValidationError("no covariate columns given");
  ColumnRoles roles{outcome, {}, covariates};
  require_disjoint(roles);
  const CsvTable t = read_csv(csv);
  const std::size_t yc = t.column(outcome);
  std::vector<std::size_t> xc;
  for (const auto& c : covariates) xc.push_back(t.column(c));
  JointData out;
  out.rows = t.rows.size();
  std::vector<std::vector<double>> xs;
  for (const auto& row : t.rows) {
    std::vector<double> v;
    const auto y = row.size() == t.header.size() ? parse_number(row[yc]) : std::nullopt;
    bool ok = y.has_value();
    for (std::size_t i = 0; ok && i < xc.size(); ++i) {
      const auto x = parse_number(row[xc[i]]);
      if (!x) ok = false;
      else v.push_back(*x);
    }
    if (!ok) {
      ++out.dropped;
      continue;
    }
    out.y.push_back(*y);
    xs.push_back(std::move(v));
  }
  if (out.y.empty()) throw ValidationError("validation file has no usable rows");
  out.x.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xc.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xc.size(); ++j) out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i][j];
  }
  return out;
}

}  // namespace combreg
