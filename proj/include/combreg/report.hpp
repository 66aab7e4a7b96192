#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "combreg/geometry.hpp"

namespace combreg {

inline constexpr int kReportSchemaVersion = 1;

/// Library version string, e.g. "0.3.0".
const char* library_version();

/// Finite values as numbers, +-infinity as the strings "inf" and "-inf", NaN as null.
nlohmann::json json_number(double v);
/// Inverse of json_number. Throws ValidationError on other types.
double number_from_json(const nlohmann::json& j);

nlohmann::json json_numbers(const std::vector<double>& v);
std::vector<double> numbers_from_json(const nlohmann::json& j);

nlohmann::json star_set_to_json(const StarSet& set);
StarSet star_set_from_json(const nlohmann::json& j);

/// p = 2: "x,y" rows of the hull with the first vertex repeated at the end.
/// p = 1: "lower,upper" of the hull of the non-empty pieces.
/// p >= 3: one row per direction "q1,...,qp,lower,upper,empty".
std::string star_set_csv(const StarSet& set);

struct IntervalRow {
  double lower = 0.0;
  double upper = 0.0;
};

/// "lower,upper" with one row per interval.
std::string interval_csv(const std::vector<IntervalRow>& rows);

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// Writes `text` to `path`, or to `fallback` when path is "-". Throws
/// ValidationError when the file cannot be written.
void write_text(const std::string& path, const std::string& text, std::ostream& fallback);

}  // namespace combreg
