#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "combreg/constraints.hpp"
#include "combreg/geometry.hpp"
#include "combreg/optimize.hpp"
#include "combreg/partition.hpp"
#include "combreg/rng.hpp"

namespace combreg {

/// {0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.45}.
std::vector<double> default_epsilon_grid();

struct InferenceConfig {
  /// Coverage 1 - alpha.
  double level = 0.95;
  /// Rows drawn from the larger sample; ceil(n^{2/3}) when unset.
  std::optional<std::size_t> b_n;
  int replications = 1000;
  /// A single value fixes epsilon; several values select it from the data.
  std::vector<double> epsilon_grid = default_epsilon_grid();
  /// With a grid, only epsilons with epsilon * min(b_y, b_x) >= min_tail_count
  /// compete; the largest grid value always does. 0 admits the whole grid.
  double min_tail_count = 3.0;
  std::uint64_t seed = 0;
  /// Minimum rows per sample for a cell to be retained in the full sample.
  std::size_t min_cell = 10;
  /// Same threshold inside subsamples. Replications that lose a cell are dropped.
  std::size_t min_cell_subsample = 2;
  OptimizerSettings optimizer;

  double alpha() const { return 1.0 - level; }
  /// Throws ValidationError on out-of-range fields.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys raise ValidationError.
  static InferenceConfig from_json(const nlohmann::json& j);
};

struct SubsampleSizes {
  std::size_t b_n = 0;
  std::size_t b_y = 0;
  std::size_t b_x = 0;
};

/// b_y and b_x proportional to n_Y and n_X, the larger sample contributing
/// b_n rows. Throws ValidationError when b_n exceeds max(n_Y, n_X).
SubsampleSizes subsample_sizes(const TwoSampleDataset& data, std::optional<std::size_t> b_n);

/// ceil(n^{2/3}) for the effective sample size n.
std::size_t default_subsample_size(double n);

/// Draws b_n^{1/2} (T* - T) for a vector-valued statistic T.
struct SubsampleDraws {
  std::vector<double> estimate;
  /// draws[j] holds the retained replications of component j.
  std::vector<std::vector<double>> draws;
  SubsampleSizes sizes;
  int replications = 0;
  int dropped = 0;

  /// Generalized-inverse quantile of component j; 0 when the estimate is not finite.
  double quantile(std::size_t j, double t) const;
};

using StatisticEvaluator = std::function<std::vector<double>(const TwoSampleDataset&)>;

/// Subsamples each of the two samples without replacement, independently,
/// with per-replication streams stream_seed(seed, r). Replications where the
/// evaluator throws are dropped and counted. Throws NumericalError when every
/// replication is dropped.
SubsampleDraws subsample_statistic(const TwoSampleDataset& data, const StatisticEvaluator& statistic,
                                   const InferenceConfig& config);
/// Same with the full-sample statistic supplied by the caller.
SubsampleDraws subsample_statistic(const TwoSampleDataset& data, std::vector<double> estimate,
                                   const StatisticEvaluator& statistic, const InferenceConfig& config);

/// Engine shared with single-sample statistics: `replicate` receives the
/// replication stream and returns the subsampled statistic.
SubsampleDraws run_subsampling(std::vector<double> estimate, const SubsampleSizes& sizes, int replications,
                               std::uint64_t seed, const std::function<std::vector<double>(Rng&)>& replicate);

/// Dataset rows restricted to the cells retained by residualize(data, min_cell).
TwoSampleDataset retained_rows(const TwoSampleDataset& data, std::size_t min_cell);

struct ConfidenceRegion {
  /// Point estimates of the bounds at the chosen epsilon.
  StarSet estimate;
  /// Confidence bounds; epsilon holds the chosen value per direction.
  StarSet region;
  /// Quantiles of the subsampled deviations used for each bound.
  std::vector<double> critical_lower;
  std::vector<double> critical_upper;
  double level = 0.95;
  double n = 0.0;
  SubsampleSizes sizes;
  int replications = 0;
  int dropped = 0;
  std::vector<std::string> warnings;
};

/// {lambda q : 0 <= lambda <= (S_eps(q) - c_alpha(q) / sqrt(n))^+}. With a
/// grid, p=1 picks epsilon per direction and p>1 uses the smallest
/// per-direction choice for every direction.
ConfidenceRegion confidence_region(const TwoSampleDataset& data, const std::vector<Eigen::VectorXd>& directions,
                                   const InferenceConfig& config);

/// The epsilon chosen for direction q.
double select_epsilon(const TwoSampleDataset& data, const Eigen::VectorXd& q, const InferenceConfig& config);

/// Two-sided region under constraints: lower bound minus the (1 - alpha/2)
/// quantile of its deviations, upper bound minus the alpha/2 quantile, both
/// scaled by n^{-1/2}. A direction is empty when the trimmed lower bound
/// exceeds the trimmed upper bound.
ConfidenceRegion constrained_region(const TwoSampleDataset& data, const std::vector<Eigen::VectorXd>& directions,
                                    const ConstraintSpec& spec, const InferenceConfig& config);

struct ComponentInterval {
  int component = 0;  // 0-based
  double lower = 0.0;
  double upper = 0.0;
  /// Estimated projection [-sigma(-e_k), sigma(e_k)] at the chosen epsilons.
  double estimate_lower = 0.0;
  double estimate_upper = 0.0;
  double epsilon_lower = 0.0;
  double epsilon_upper = 0.0;
  double critical_lower = 0.0;
  double critical_upper = 0.0;
  double level = 0.95;
  double n = 0.0;
  SubsampleSizes sizes;
  int replications = 0;
  int dropped = 0;
};

/// [(-sigma(-e_k) + c(-e_k)/sqrt(n))^-, (sigma(e_k) - c(e_k)/sqrt(n))^+],
/// with the support function re-optimized in every subsample.
ComponentInterval confidence_interval_component(const TwoSampleDataset& data, int k, const InferenceConfig& config);

enum class TestKind { point_id, equality };

struct TestResult {
  TestKind kind = TestKind::point_id;
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double epsilon = 0.0;
  /// beta_v for the point-identification test, theta-hat for the equality test.
  Eigen::VectorXd auxiliary;
  SubsampleSizes sizes;
  int replications = 0;
  int dropped = 0;
};

/// H0: S(F_Y, F_{X' beta_v}) = 1 on a joint validation sample. T = sqrt(n)(S - 1),
/// T* = sqrt(b_n)(S* - S) with beta_v re-estimated by OLS in every subsample.
/// Epsilon is the data-driven choice at beta_v / |beta_v| times
/// `epsilon_multiplier`. Throws NumericalError for a singular design or beta_v = 0.
TestResult point_id_test(std::span<const double> y, const Eigen::MatrixXd& x, const InferenceConfig& config,
                         double epsilon_multiplier = 1.0);

struct TstslsResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd std_error;
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
  double intercept = 0.0;
  double level = 0.95;
};

/// Regresses X_nc on cell dummies in the covariate sample, predicts X_nc in
/// the outcome sample, then regresses Y on [1, predicted X_nc]. Standard
/// errors add the first-stage sampling variance to the heteroskedasticity-
/// robust second-stage variance. Throws NumericalError when the first stage
/// is rank deficient or the prediction has no variation.
TstslsResult tstsls(const TwoSampleDataset& data, double level = 0.95);

/// Equality of the TSTSLS estimate of beta_k and the estimated upper bound
/// sigma(e_k): statistic sqrt(n)|theta|, critical value the (1 - alpha)
/// quantile of sqrt(b_n)|theta* - theta|.
TestResult equality_test(const TwoSampleDataset& data, int k, const InferenceConfig& config);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace combreg
