#include "combreg/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "combreg/errors.hpp"

namespace combreg {

const char* library_version() { return COMBREG_VERSION; }

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("expected a number, \"inf\" or \"-inf\"");
}

nlohmann::json json_numbers(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

std::vector<double> numbers_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number_from_json(x));
  return v;
}

nlohmann::json star_set_to_json(const StarSet& set) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& q : set.directions) dirs.push_back(std::vector<double>(q.data(), q.data() + q.size()));
  nlohmann::json hull = nlohmann::json::array();
  for (const auto& v : set.hull_vertices) hull.push_back({v.x(), v.y()});
  std::vector<bool> empty(set.empty.begin(), set.empty.end());
  return {{"dimension", set.dimension},
          {"directions", dirs},
          {"lower", json_numbers(set.lower)},
          {"upper", json_numbers(set.upper)},
          {"epsilon", json_numbers(set.epsilon)},
          {"empty", empty},
          {"hull_vertices", hull}};
}

StarSet star_set_from_json(const nlohmann::json& j) {
  StarSet s;
  try {
    s.dimension = j.at("dimension").get<int>();
    for (const auto& d : j.at("directions")) {
      const auto v = d.get<std::vector<double>>();
      s.directions.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    s.lower = numbers_from_json(j.at("lower"));
    s.upper = numbers_from_json(j.at("upper"));
    s.epsilon = numbers_from_json(j.at("epsilon"));
    for (const auto& e : j.at("empty")) s.empty.push_back(e.get<bool>());
    for (const auto& v : j.at("hull_vertices")) s.hull_vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("star set: ") + e.what());
  }
  const std::size_t n = s.directions.size();
  if (s.lower.size() != n || s.upper.size() != n || s.epsilon.size() != n || s.empty.size() != n) {
    throw ValidationError("star set: per-direction arrays differ in length");
  }
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string star_set_csv(const StarSet& set) {
  std::ostringstream os;
  if (set.dimension == 2) {
    os << "x,y\n";
    for (const auto& v : set.hull_vertices) os << format_number(v.x()) << ',' << format_number(v.y()) << '\n';
    if (!set.hull_vertices.empty()) {
      const auto& v = set.hull_vertices.front();
      os << format_number(v.x()) << ',' << format_number(v.y()) << '\n';
    }
    return os.str();
  }
  if (set.dimension == 1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.empty[i]) continue;
      const double s = set.directions[i][0];
      for (double lam : {set.lower[i], set.upper[i]}) {
        lo = std::min(lo, s * lam);
        hi = std::max(hi, s * lam);
      }
    }
    os << "lower,upper\n";
    if (lo <= hi) os << format_number(lo) << ',' << format_number(hi) << '\n';
    return os.str();
  }
  for (int k = 0; k < set.dimension; ++k) os << 'q' << (k + 1) << ',';
  os << "lower,upper,empty\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (int k = 0; k < set.dimension; ++k) os << format_number(set.directions[i][k]) << ',';
    os << format_number(set.lower[i]) << ',' << format_number(set.upper[i]) << ',' << (set.empty[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string interval_csv(const std::vector<IntervalRow>& rows) {
  std::ostringstream os;
  os << "lower,upper\n";
  for (const auto& r : rows) os << format_number(r.lower) << ',' << format_number(r.upper) << '\n';
  return os.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("cannot write '" + path + "'");
}

}  // namespace combreg
