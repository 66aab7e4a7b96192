#include "combreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "combreg/errors.hpp"
#include "combreg/geometry.hpp"
#include "combreg/report.hpp"

namespace combreg {
namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

McMethod parse_method(const std::string& s) {
  for (McMethod m : {McMethod::interval, McMethod::tstsls, McMethod::point_id}) {
    if (s == to_string(m)) return m;
  }
  throw ValidationError("unknown method '" + s + "' (interval, tstsls, pointid)");
}

std::optional<double> parse_epsilon(const std::string& s) {
  if (s == "auto") return std::nullopt;
  const auto v = parse_number(s);
  if (!v) throw ValidationError("--epsilon must be a number or 'auto'");
  return v;
}

nlohmann::json sizes_json(const SubsampleSizes& s) { return {{"b_n", s.b_n}, {"b_y", s.b_y}, {"b_x", s.b_x}}; }

nlohmann::json excluded_json(const std::vector<ExcludedCell>& cells) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : cells) a.push_back({{"label", c.label}, {"n_y", c.n_y}, {"n_x", c.n_x}, {"reason", c.reason}});
  return a;
}

nlohmann::json f_set_json(const FSet& f) {
  return {{"cell_labels", f.cell_labels},
          {"f_lower", json_numbers(f.f_lower)},
          {"f_upper", json_numbers(f.f_upper)},
          {"gamma_labels", f.gamma_labels},
          {"gamma_lower", json_numbers(f.gamma_lower)},
          {"gamma_upper", json_numbers(f.gamma_upper)}};
}

// Smallest interval holding every non-empty piece of a p = 1 star set; lower > upper when all are empty.
std::pair<double, double> hull_1d(const StarSet& s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.empty[i]) continue;
    for (double lam : {s.lower[i], s.upper[i]}) {
      lo = std::min(lo, s.directions[i][0] * lam);
      hi = std::max(hi, s.directions[i][0] * lam);
    }
  }
  return {lo, hi};
}

std::string component_name(const TwoSampleDataset& data, int k) {
  const auto i = static_cast<std::size_t>(k);
  if (i < data.covariate_names.size() && !data.covariate_names[i].empty()) return data.covariate_names[i];
  return "beta" + std::to_string(k + 1);
}

// 0-based components; all of them when none were requested.
std::vector<int> resolve_components(const RunConfig& cfg, int p) {
  std::vector<int> ks;
  if (cfg.components.empty()) {
    for (int k = 0; k < p; ++k) ks.push_back(k);
    return ks;
  }
  for (int c : cfg.components) {
    if (c < 1 || c > p) throw ValidationError("component " + std::to_string(c) + " outside 1.." + std::to_string(p));
    ks.push_back(c - 1);
  }
  return ks;
}

InferenceConfig effective_inference(const RunConfig& cfg) {
  InferenceConfig inf = cfg.inference;
  if (cfg.epsilon) inf.epsilon_grid = {*cfg.epsilon};
  inf.validate();
  return inf;
}

std::vector<Eigen::VectorXd> resolve_directions(RunConfig& cfg, int p) {
  if (p == 1) cfg.directions = 2;
  if (cfg.directions == 0) cfg.directions = default_direction_count(p);
  if (cfg.directions < 2) throw ValidationError("--directions must be at least 2");
  return sphere_grid(p, cfg.directions);
}

LoadedDataset load_two_samples(const RunConfig& cfg) {
  if (!cfg.data_csv.empty()) {
    if (cfg.split_column.empty()) throw ValidationError("--data needs --split for this command");
    return load_split_dataset(cfg.data_csv, cfg.split_column, cfg.roles);
  }
  if (cfg.outcome_csv.empty() || cfg.covariate_csv.empty()) {
    throw ValidationError("--outcome and --covariates (or --data with --split) are required");
  }
  return load_dataset(cfg.outcome_csv, cfg.covariate_csv, cfg.roles);
}

ConfidenceRegion infer_region(const RunConfig& cfg, const TwoSampleDataset& data,
                              const std::vector<Eigen::VectorXd>& dirs) {
  const auto inf = effective_inference(cfg);
  return cfg.constraints ? constrained_region(data, dirs, *cfg.constraints, inf) : confidence_region(data, dirs, inf);
}

nlohmann::json region_json(const ConfidenceRegion& cr) {
  return {{"estimate", star_set_to_json(cr.estimate)},
          {"region", star_set_to_json(cr.region)},
          {"critical_lower", json_numbers(cr.critical_lower)},
          {"critical_upper", json_numbers(cr.critical_upper)},
          {"level", cr.level},
          {"n", cr.n},
          {"subsample", sizes_json(cr.sizes)},
          {"replications", cr.replications},
          {"dropped", cr.dropped},
          {"warnings", cr.warnings}};
}

nlohmann::json run_set(RunConfig& cfg, const TwoSampleDataset& data, std::string& csv) {
  const auto dirs = resolve_directions(cfg, data.dimension());
  const CellPartition partition = residualize(data, cfg.inference.min_cell);
  StarSet set;
  std::vector<std::string> warnings;
  if (cfg.epsilon) {
    if (cfg.constraints) {
      auto cs = constrained_set(partition, *cfg.constraints, dirs, *cfg.epsilon);
      set = std::move(cs.set);
      warnings = std::move(cs.warnings);
    } else {
      set = radial_set(partition, dirs, *cfg.epsilon);
    }
  } else {
    auto cr = infer_region(cfg, data, dirs);
    set = std::move(cr.estimate);
    warnings = std::move(cr.warnings);
  }
  nlohmann::json result = {{"epsilon_mode", cfg.epsilon ? "fixed" : "auto"},
                           {"set", star_set_to_json(set)},
                           {"excluded_cells", excluded_json(partition.excluded())}};
  if (set.dimension == 1) {
    const auto [lo, hi] = hull_1d(set);
    result["interval"] = {json_number(lo), json_number(hi)};
  }
  if (partition.cells().size() > 1) {
    try {
      result["f_set"] = f_set_json(f_set(partition, set));
    } catch (const ValidationError& e) {
      warnings.push_back(std::string("common-regressor effects not reported: ") + e.what());
    }
  }
  result["warnings"] = warnings;
  csv = star_set_csv(set);
  return result;
}

nlohmann::json run_region(RunConfig& cfg, const TwoSampleDataset& data, std::string& csv) {
  const auto dirs = resolve_directions(cfg, data.dimension());
  const auto cr = infer_region(cfg, data, dirs);
  csv = star_set_csv(cr.region);
  return region_json(cr);
}

nlohmann::json run_ci(RunConfig& cfg, const TwoSampleDataset& data, std::string& csv) {
  const int p = data.dimension();
  const auto ks = resolve_components(cfg, p);
  if (cfg.constraints && p != 1) throw ValidationError("constrained component intervals need p = 1");
  const auto inf = effective_inference(cfg);
  nlohmann::json intervals = nlohmann::json::array();
  std::vector<IntervalRow> rows;
  for (int k : ks) {
    nlohmann::json iv;
    if (cfg.constraints) {
      const auto cr = constrained_region(data, sphere_grid(1, 2), *cfg.constraints, inf);
      const auto [lo, hi] = hull_1d(cr.region);
      const auto [elo, ehi] = hull_1d(cr.estimate);
      iv = {{"lower", json_number(lo)},
            {"upper", json_number(hi)},
            {"empty", lo > hi},
            {"estimate_lower", json_number(elo)},
            {"estimate_upper", json_number(ehi)},
            {"region", region_json(cr)}};
      rows.push_back({lo, hi});
    } else {
      const auto ci = confidence_interval_component(data, k, inf);
      iv = {{"lower", json_number(ci.lower)},
            {"upper", json_number(ci.upper)},
            {"estimate_lower", json_number(ci.estimate_lower)},
            {"estimate_upper", json_number(ci.estimate_upper)},
            {"epsilon_lower", ci.epsilon_lower},
            {"epsilon_upper", ci.epsilon_upper},
            {"critical_lower", json_number(ci.critical_lower)},
            {"critical_upper", json_number(ci.critical_upper)},
            {"level", ci.level},
            {"n", ci.n},
            {"subsample", sizes_json(ci.sizes)},
            {"replications", ci.replications},
            {"dropped", ci.dropped}};
      rows.push_back({ci.lower, ci.upper});
    }
    iv["component"] = k + 1;
    iv["name"] = component_name(data, k);
    intervals.push_back(std::move(iv));
  }
  csv = interval_csv(rows);
  return {{"intervals", intervals}};
}

nlohmann::json test_json(const TestResult& t) {
  return {{"statistic", json_number(t.statistic)},
          {"critical_value", json_number(t.critical_value)},
          {"p_value", t.p_value},
          {"reject", t.reject},
          {"epsilon", t.epsilon},
          {"subsample", sizes_json(t.sizes)},
          {"replications", t.replications},
          {"dropped", t.dropped}};
}

std::string test_csv_row(const TestResult& t) {
  return format_number(t.statistic) + ',' + format_number(t.critical_value) + ',' + format_number(t.p_value) + ',' +
         (t.reject ? "1" : "0") + ',' + format_number(t.epsilon) + '\n';
}

nlohmann::json run_pointid(RunConfig& cfg, nlohmann::json& data_summary, std::string& csv) {
  if (cfg.data_csv.empty() || cfg.roles.outcome.empty() || cfg.roles.not_common.empty()) {
    throw ValidationError("pointid needs --data, --y and --xnc");
  }
  const auto joint = load_joint(cfg.data_csv, cfg.roles.outcome, cfg.roles.not_common);
  data_summary = {{"rows", joint.rows}, {"dropped", joint.dropped}};
  const auto t = point_id_test(joint.y, joint.x, effective_inference(cfg), cfg.epsilon_multiplier);
  nlohmann::json result = test_json(t);
  result["beta_v"] = json_numbers(std::vector<double>(t.auxiliary.data(), t.auxiliary.data() + t.auxiliary.size()));
  result["level"] = cfg.inference.level;
  csv = "statistic,critical_value,p_value,reject,epsilon\n" + test_csv_row(t);
  return result;
}

nlohmann::json run_tstsls(RunConfig& cfg, const TwoSampleDataset& data, std::string& csv) {
  const auto ks = resolve_components(cfg, data.dimension());
  const auto inf = effective_inference(cfg);
  const auto est = tstsls(data, inf.level);
  auto vec = [](const Eigen::VectorXd& v) { return json_numbers(std::vector<double>(v.data(), v.data() + v.size())); };
  nlohmann::json tests = nlohmann::json::array();
  std::vector<IntervalRow> rows;
  for (int k : ks) {
    const auto t = equality_test(data, k, inf);
    nlohmann::json j = test_json(t);
    j["component"] = k + 1;
    j["name"] = component_name(data, k);
    j["theta"] = json_number(t.auxiliary.size() > 0 ? t.auxiliary[0] : std::nan(""));
    tests.push_back(std::move(j));
    rows.push_back({est.ci_lower[k], est.ci_upper[k]});
  }
  csv = interval_csv(rows);
  return {{"tstsls",
           {{"beta", vec(est.beta)},
            {"std_error", vec(est.std_error)},
            {"ci_lower", vec(est.ci_lower)},
            {"ci_upper", vec(est.ci_upper)},
            {"intercept", json_number(est.intercept)},
            {"level", est.level}}},
          {"equality_tests", tests}};
}

McConfig mc_config(const RunConfig& cfg) {
  McConfig mc;
  mc.method = cfg.method;
  mc.inference = effective_inference(cfg);
  if (cfg.components.size() > 1) throw ValidationError("mc takes a single --component");
  mc.component = cfg.components.empty() ? 0 : cfg.components.front() - 1;
  mc.constraints = cfg.constraints;
  mc.epsilon_multiplier = cfg.epsilon_multiplier;
  mc.sims = cfg.sims;
  mc.seed = cfg.inference.seed;
  return mc;
}

nlohmann::json run_mc(const RunConfig& cfg, std::string& csv) {
  if (cfg.preset.empty()) throw ValidationError("mc needs --preset");
  const Dgp dgp = make_dgp(cfg.preset, cfg.overrides);
  const auto report = run_monte_carlo(dgp, mc_config(cfg));
  csv = report.to_csv();
  return report.to_json();
}

std::string opt_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return j.at(key).get<std::string>();
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  auto path = [](const std::string& s) { return s.empty() ? nlohmann::json(nullptr) : nlohmann::json(s); };
  return {{"command", command},
          {"inputs",
           {{"outcome", path(outcome_csv)},
            {"covariates", path(covariate_csv)},
            {"data", path(data_csv)},
            {"split", path(split_column)}}},
          {"roles", roles.to_json()},
          {"epsilon", epsilon ? nlohmann::json(*epsilon) : nlohmann::json("auto")},
          {"inference", inference.to_json()},
          {"directions", directions},
          {"constraints_file", path(constraints_file)},
          {"constraints", constraints ? constraints->to_json() : nlohmann::json(nullptr)},
          {"components", components},
          {"simulation",
           {{"preset", path(preset)},
            {"overrides", overrides},
            {"sims", sims},
            {"method", to_string(method)},
            {"epsilon_multiplier", epsilon_multiplier}}},
          {"output", {{"path", out}, {"format", format}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& input) {
  const nlohmann::json& j = input.contains("config") && input.contains("schema_version") ? input.at("config") : input;
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    const auto& in = j.at("inputs");
    c.outcome_csv = opt_string(in, "outcome");
    c.covariate_csv = opt_string(in, "covariates");
    c.data_csv = opt_string(in, "data");
    c.split_column = opt_string(in, "split");
    const auto& r = j.at("roles");
    c.roles.outcome = r.at("outcome").get<std::string>();
    c.roles.common = r.at("common").get<std::vector<std::string>>();
    c.roles.not_common = r.at("not_common").get<std::vector<std::string>>();
    const auto& e = j.at("epsilon");
    if (!(e.is_string() && e.get<std::string>() == "auto")) c.epsilon = e.get<double>();
    c.inference = InferenceConfig::from_json(j.at("inference"));
    c.directions = j.at("directions").get<int>();
    c.constraints_file = opt_string(j, "constraints_file");
    if (!j.at("constraints").is_null()) c.constraints = ConstraintSpec::from_json(j.at("constraints"));
    c.components = j.at("components").get<std::vector<int>>();
    const auto& s = j.at("simulation");
    c.preset = opt_string(s, "preset");
    c.overrides = s.at("overrides");
    c.sims = s.at("sims").get<int>();
    c.method = parse_method(s.at("method").get<std::string>());
    c.epsilon_multiplier = s.at("epsilon_multiplier").get<double>();
    c.out = j.at("output").at("path").get<std::string>();
    c.format = j.at("output").at("format").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("invalid run configuration: ") + ex.what());
  }
  return c;
}

CommandOutput execute(RunConfig cfg) {
  if (cfg.format != "json" && cfg.format != "csv") throw ValidationError("--format must be json or csv");
  if (!(cfg.epsilon_multiplier > 0.0) || !std::isfinite(cfg.epsilon_multiplier)) {
    throw ValidationError("--eps-multiplier must be positive");
  }
  if (!cfg.constraints_file.empty() && !cfg.constraints) {
    cfg.constraints = ConstraintSpec::from_json(read_json_file(cfg.constraints_file));
  }

  CommandOutput output;
  nlohmann::json data_summary = nullptr;
  nlohmann::json result;
  const std::string& cmd = cfg.command;
  if (cmd == "mc") {
    result = run_mc(cfg, output.csv);
  } else if (cmd == "pointid") {
    result = run_pointid(cfg, data_summary, output.csv);
  } else if (cmd == "set" || cmd == "region" || cmd == "ci" || cmd == "tstsls") {
    const auto loaded = load_two_samples(cfg);
    const auto& data = loaded.data;
    data_summary = loaded.summary.to_json();
    data_summary["n_y"] = data.n_y();
    data_summary["n_x"] = data.n_x();
    data_summary["n"] = data.effective_n();
    data_summary["dimension"] = data.dimension();
    data_summary["covariates"] = data.covariate_names;
    if (cmd == "set") result = run_set(cfg, data, output.csv);
    else if (cmd == "region") result = run_region(cfg, data, output.csv);
    else if (cmd == "ci") result = run_ci(cfg, data, output.csv);
    else result = run_tstsls(cfg, data, output.csv);
  } else {
    throw ValidationError("unknown command '" + cmd + "'");
  }

  output.report = {{"schema_version", kReportSchemaVersion},
                   {"version", library_version()},
                   {"command", cmd},
                   {"config", cfg.to_json()},
                   {"data", data_summary},
                   {"result", std::move(result)}};
  return output;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identified sets and confidence regions for regression coefficients from two unlinked samples",
               "combreg"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(0, 1);

  std::string config_file;
  app.add_option("--config", config_file, "Re-run the configuration embedded in a report or config file")
      ->check(CLI::ExistingFile);

  // Raw flag values shared by all subcommands; only one subcommand is parsed.
  std::string outcome, covariates, data, split, y, epsilon = "auto", constraints, out_path = "-", format = "json";
  std::vector<std::string> xc, xnc;
  std::vector<double> eps_grid;
  std::vector<int> components;
  double level = 0.95, min_tail = 3.0, eps_multiplier = 1.0;
  std::size_t bn = 0, min_cell = 10;
  int subsamples = 1000, directions = 0, sims = 200;
  std::uint64_t seed = 0;
  std::string preset, method = "interval", overrides;
  std::size_t n = 0;

  auto add_data = [&](CLI::App* s) {
    s->add_option("--outcome", outcome, "CSV with the outcome and common regressors");
    s->add_option("--covariates", covariates, "CSV with the other regressors and common regressors");
    s->add_option("--data", data, "Single CSV holding both samples");
    s->add_option("--split", split, "Column of --data naming the sample: outcome or covariates");
    s->add_option("--y", y, "Outcome column");
    s->add_option("--xc", xc, "Common-regressor columns")->delimiter(',');
    s->add_option("--xnc", xnc, "Columns observed only with the covariates")->delimiter(',');
    s->add_option("--min-cell", min_cell, "Minimum rows per sample for a common-regressor cell");
  };
  auto add_epsilon = [&](CLI::App* s) {
    s->add_option("--epsilon", epsilon, "Trimming level, or auto to select it from --eps-grid");
    s->add_option("--eps-grid", eps_grid, "Candidate trimming levels for auto")->delimiter(',');
    s->add_option("--min-tail-count", min_tail, "Smallest epsilon * subsample size admitted by auto");
  };
  auto add_inference = [&](CLI::App* s) {
    s->add_option("--level", level, "Confidence level");
    s->add_option("--bn", bn, "Subsample size of the larger sample (default ceil(n^(2/3)))");
    s->add_option("--subsamples", subsamples, "Subsampling replications");
    s->add_option("--seed", seed, "Random seed");
  };
  auto add_output = [&](CLI::App* s) {
    s->add_option("--out", out_path, "Output file, - for standard output");
    s->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_constraints = [&](CLI::App* s) {
    s->add_option("--constraints", constraints, "Constraint JSON file")->check(CLI::ExistingFile);
  };
  auto add_components = [&](CLI::App* s) {
    s->add_option("--component", components, "1-based coefficient index")->delimiter(',');
  };

  auto* set = app.add_subcommand("set", "Estimated identified set and its hull");
  auto* region = app.add_subcommand("region", "Confidence region for the coefficient vector");
  auto* ci = app.add_subcommand("ci", "Confidence intervals for single coefficients");
  auto* mc = app.add_subcommand("mc", "Monte Carlo experiment on a preset design");
  auto* pointid = app.add_subcommand("pointid", "Point-identification test on a joint sample");
  auto* ts = app.add_subcommand("tstsls", "Two-sample two-stage least squares and the equality test");

  for (auto* s : {set, region, ci, ts}) add_data(s);
  for (auto* s : {set, region, ci, mc, pointid, ts}) {
    add_epsilon(s);
    add_inference(s);
    add_output(s);
  }
  for (auto* s : {set, region}) {
    s->add_option("--directions", directions, "Number of directions on the unit sphere");
  }
  for (auto* s : {set, region, ci, mc}) add_constraints(s);
  for (auto* s : {ci, mc, ts}) add_components(s);
  pointid->add_option("--data", data, "CSV with jointly observed outcome and covariates")->required();
  pointid->add_option("--y", y, "Outcome column")->required();
  pointid->add_option("--xnc", xnc, "Covariate columns")->delimiter(',')->required();
  for (auto* s : {mc, pointid}) {
    s->add_option("--eps-multiplier", eps_multiplier, "Factor applied to the selected epsilon (pointid)");
  }
  mc->add_option("--preset", preset, "Design name")->required();
  mc->add_option("--n", n, "Size of each sample");
  mc->add_option("--sims", sims, "Number of simulations");
  mc->add_option("--method", method, "interval, tstsls or pointid");
  mc->add_option("--override", overrides, "JSON object of design overrides, e.g. {\"beta\": 0}");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    const auto subs = app.get_subcommands();
    if (!config_file.empty()) {
      if (!subs.empty()) throw ValidationError("--config cannot be combined with a command");
      cfg = RunConfig::from_json(read_json_file(config_file));
    } else if (subs.empty()) {
      err << app.help();
      return 2;
    } else {
      const CLI::App* s = subs.front();
      auto given = [s](const char* name) {
        const CLI::Option* o = s->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
      };
      cfg.command = s->get_name();
      cfg.outcome_csv = outcome;
      cfg.covariate_csv = covariates;
      cfg.data_csv = data;
      cfg.split_column = split;
      cfg.roles = {y, xc, xnc};
      cfg.epsilon = parse_epsilon(epsilon);
      if (!eps_grid.empty()) cfg.inference.epsilon_grid = eps_grid;
      cfg.inference.min_tail_count = min_tail;
      cfg.inference.level = level;
      if (given("--bn")) cfg.inference.b_n = bn;
      cfg.inference.replications = subsamples;
      cfg.inference.seed = seed;
      cfg.inference.min_cell = min_cell;
      cfg.directions = directions;
      cfg.constraints_file = constraints;
      cfg.components = components;
      cfg.preset = preset;
      if (!overrides.empty()) {
        try {
          cfg.overrides = nlohmann::json::parse(overrides);
        } catch (const nlohmann::json::parse_error& e) {
          throw ValidationError(std::string("--override is not valid JSON: ") + e.what());
        }
        if (!cfg.overrides.is_object()) throw ValidationError("--override must be a JSON object");
      }
      if (given("--n")) cfg.overrides["n"] = n;
      cfg.sims = sims;
      cfg.method = parse_method(method);
      cfg.epsilon_multiplier = eps_multiplier;
      cfg.out = out_path;
      cfg.format = format;
    }

    const CommandOutput result = execute(cfg);
    const std::string json = result.report.dump(2) + "\n";
    if (cfg.format == "json") {
      write_text(cfg.out, json, out);
    } else {
      write_text(cfg.out, result.csv, out);
      if (cfg.out != "-") write_text(cfg.out + ".json", json, out);
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace combreg
