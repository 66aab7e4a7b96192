#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "combreg/constraints.hpp"
#include "combreg/dataset_io.hpp"
#include "combreg/inference.hpp"
#include "combreg/simlab.hpp"

namespace combreg {

/// Everything a command needs. Reports embed `to_json()` so that a report
/// can be re-run through `from_json`.
struct RunConfig {
  /// set, region, ci, mc, pointid or tstsls.
  std::string command;

  std::string outcome_csv;
  std::string covariate_csv;
  /// Single file with a split column (or the joint file for pointid).
  std::string data_csv;
  std::string split_column;
  ColumnRoles roles;

  /// Fixed epsilon; nullopt selects it from inference.epsilon_grid.
  std::optional<double> epsilon;
  InferenceConfig inference;
  /// Directions on the sphere; 0 uses default_direction_count(p).
  int directions = 0;
  std::string constraints_file;
  std::optional<ConstraintSpec> constraints;
  /// 1-based; empty means every component.
  std::vector<int> components;

  std::string preset;
  nlohmann::json overrides = nlohmann::json::object();
  int sims = 200;
  McMethod method = McMethod::interval;
  double epsilon_multiplier = 1.0;

  /// "-" writes to the output stream.
  std::string out = "-";
  /// json or csv. With csv and a file `out`, the JSON report goes to `out`.json.
  std::string format = "json";

  nlohmann::json to_json() const;
  /// Accepts a bare config or a report holding one under "config".
  static RunConfig from_json(const nlohmann::json& j);
};

struct CommandOutput {
  nlohmann::json report;
  /// Plot-ready table for --format csv.
  std::string csv;
};

/// Runs a validated config. Throws ValidationError or NumericalError.
CommandOutput execute(RunConfig config);

/// Parses `args` (without the program name), runs the command and writes
/// the report. Returns 0 on success, 2 on invalid input or arguments, 3 on
/// numerical failure; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace combreg
