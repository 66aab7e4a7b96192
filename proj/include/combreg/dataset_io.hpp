#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "combreg/partition.hpp"

namespace combreg {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
};

/// RFC 4180 style: comma separated, double-quoted fields with "" escapes,
/// LF or CRLF line ends, optional UTF-8 byte order mark. Blank lines are skipped.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

/// Locale-independent decimal parse of a whole field (surrounding blanks
/// allowed). Empty, NA, non-numeric and non-finite fields give nullopt.
std::optional<double> parse_number(std::string_view field);

struct ColumnRoles {
  std::string outcome;
  /// Common regressors; their joint value defines the cell.
  std::vector<std::string> common;
  std::vector<std::string> not_common;

  nlohmann::json to_json() const;
};

struct LoadSummary {
  std::size_t outcome_rows = 0;
  std::size_t covariate_rows = 0;
  /// Rows with a missing or non-numeric value, or the wrong number of fields.
  std::size_t outcome_dropped = 0;
  std::size_t covariate_dropped = 0;
  /// Rows whose common-regressor value appears in one file only.
  std::size_t outcome_unmatched = 0;
  std::size_t covariate_unmatched = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct LoadedDataset {
  TwoSampleDataset data;
  LoadSummary summary;
};

/// Builds the two samples. Empty `roles.outcome` picks the single outcome-file
/// column outside `roles.common`; empty `roles.not_common` takes every
/// covariate-file column outside `roles.common`. Throws ValidationError for
/// missing or overlapping columns, zero usable rows, or no common-regressor
/// value shared by the two files.
LoadedDataset build_dataset(const CsvTable& outcome, const CsvTable& covariates, ColumnRoles roles);

LoadedDataset load_dataset(const std::string& outcome_csv, const std::string& covariate_csv,
                           const ColumnRoles& roles);

/// Single-file mode: rows whose `split_column` equals "outcome" form the
/// outcome sample and rows equal to "covariates" the covariate sample.
LoadedDataset load_split_dataset(const std::string& csv, const std::string& split_column, const ColumnRoles& roles);

/// Jointly observed (y, x) rows, e.g. a validation sample for the
/// point-identification test. Rows with missing values are dropped.
struct JointData {
  std::vector<double> y;
  Eigen::MatrixXd x;
  std::size_t rows = 0;
  std::size_t dropped = 0;
};

JointData load_joint(const std::string& csv, const std::string& outcome, const std::vector<std::string>& covariates);

}  // namespace combreg
