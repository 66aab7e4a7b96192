#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "combreg/constraints.hpp"
#include "combreg/inference.hpp"
#include "combreg/partition.hpp"
#include "combreg/rng.hpp"

namespace combreg {

/// Parameters of a simulation design. Latent normals N ~ N(0, sigma) are
/// mapped to (X_c, X_nc) according to `family`.
struct DgpSpec {
  std::string name;
  /// linear-normal, linear-gamma, binary-common, illustration-a,
  /// illustration-b, validation
  std::string family;
  int dimension = 1;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd beta;
  /// Coefficient on the common regressor (or on X_c^1.3 for the illustration designs).
  double gamma = 0.0;
  double intercept = 0.0;
  /// Standard deviation of a normal U, or the scale of a gamma U.
  double u_scale = 1.0;
  /// Shape of a gamma U; 0 for a normal U.
  double u_shape = 0.0;
  std::size_t n_y = 800;
  std::size_t n_x = 800;

  nlohmann::json to_json() const;
};

/// One draw from the joint law of (Y, X_nc, X_c).
struct Unit {
  double y = 0.0;
  Eigen::VectorXd x;
  int cell = 0;
};

struct JointSample {
  std::vector<double> y;
  Eigen::MatrixXd x;
};

class Dgp {
 public:
  explicit Dgp(DgpSpec spec);

  const DgpSpec& spec() const { return spec_; }
  const std::vector<CellInfo>& cells() const { return cells_; }

  Unit draw_unit(Rng& rng) const;
  /// Independent outcome and covariate samples of sizes n_y and n_x.
  TwoSampleDataset draw(Rng& rng) const;
  /// n units observed jointly (validation designs).
  JointSample draw_joint(Rng& rng, std::size_t n) const;

  /// Population variance of Y and covariance of X_nc for the Gaussian
  /// designs without a common regressor; nullopt otherwise.
  std::optional<std::pair<double, Eigen::MatrixXd>> gaussian_moments() const;

 private:
  DgpSpec spec_;
  std::vector<CellInfo> cells_;
  Eigen::MatrixXd chol_;
  std::vector<double> cuts_;
};

/// normal-p1, gamma-p1, normal-p2, common-p1, common-p1-gamma0,
/// illustration-a, illustration-b, validation-h0, validation-h1.
std::vector<std::string> preset_names();

/// Builds a preset. Overrides: beta (number or array), gamma, intercept,
/// n (both samples), n_y, n_x. Throws ValidationError for unknown names or keys.
Dgp make_dgp(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object());

enum class McMethod { interval, tstsls, point_id };

const char* to_string(McMethod method);

struct McConfig {
  McMethod method = McMethod::interval;
  InferenceConfig inference;
  /// 0-based component the interval targets.
  int component = 0;
  /// Applied through the constrained region (p = 1 only).
  std::optional<ConstraintSpec> constraints;
  double epsilon_multiplier = 1.0;
  int sims = 200;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct McTarget {
  std::string name;
  double reference_lower = 0.0;
  double reference_upper = 0.0;
  /// Averages over simulations.
  double estimate_lower = 0.0;
  double estimate_upper = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  /// Mean CI length minus the reference length.
  double excess_length = 0.0;
  /// Minimum of the endpoint coverages.
  double coverage = 0.0;
  double coverage_lower = 0.0;
  double coverage_upper = 0.0;
};

struct McReport {
  std::string dgp;
  nlohmann::json dgp_spec;
  nlohmann::json method;
  int sims = 0;
  int failed = 0;
  std::uint64_t seed = 0;
  std::vector<McTarget> targets;
  /// Point-identification test only.
  std::optional<double> rejection_rate;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Reference identified interval for component `component`: analytic for the
/// Gaussian designs without a common regressor, otherwise an estimate on one
/// n = 10^6 draw with epsilon = 10^-3 (cached per design and constraints).
std::pair<double, double> reference_interval(const Dgp& dgp, int component,
                                             const std::optional<ConstraintSpec>& constraints);

/// Repeats draw -> estimate -> infer with simulation s using streams derived
/// from (seed, s). Throws ValidationError when sims < 1.
McReport run_monte_carlo(const Dgp& dgp, const McConfig& config);

}  // namespace combreg
