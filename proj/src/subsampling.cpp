#include <algorithm>
#include <cmath>
#include <numeric>

#include "combreg/empdist.hpp"
#include "combreg/errors.hpp"
#include "combreg/inference.hpp"
#include "combreg/parallel.hpp"
#include "combreg/rng.hpp"

namespace combreg {

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count) {
  if (count > n) throw ValidationError("cannot draw more rows than available");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

std::vector<double> default_epsilon_grid() { return {0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.45}; }

void InferenceConfig::validate() const {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  if (replications < 1) throw ValidationError("replications must be positive");
  if (b_n && *b_n < 1) throw ValidationError("subsample size must be positive");
  if (epsilon_grid.empty()) throw ValidationError("epsilon grid is empty");
  for (double e : epsilon_grid) {
    if (!(e > 0.0 && e <= 0.5)) throw ValidationError("every epsilon must lie in (0, 0.5]");
  }
  if (min_cell < 1 || min_cell_subsample < 1) throw ValidationError("cell size thresholds must be positive");
  if (!(min_tail_count >= 0.0) || !std::isfinite(min_tail_count)) {
    throw ValidationError("min_tail_count must be finite and nonnegative");
  }
}

nlohmann::json InferenceConfig::to_json() const {
  return {{"level", level},
          {"b_n", b_n ? nlohmann::json(*b_n) : nlohmann::json(nullptr)},
          {"replications", replications},
          {"epsilon_grid", epsilon_grid},
          {"min_tail_count", min_tail_count},
          {"seed", seed},
          {"min_cell", min_cell},
          {"min_cell_subsample", min_cell_subsample},
          {"optimizer",
           {{"fd_step", optimizer.fd_step},
            {"rel_tol", optimizer.rel_tol},
            {"max_iterations", optimizer.max_iterations},
            {"multi_start", optimizer.multi_start}}}};
}

InferenceConfig InferenceConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("inference config must be a JSON object");
  InferenceConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "level") c.level = v.get<double>();
      else if (key == "b_n") c.b_n = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      else if (key == "replications") c.replications = v.get<int>();
      else if (key == "epsilon_grid") c.epsilon_grid = v.get<std::vector<double>>();
      else if (key == "min_tail_count") c.min_tail_count = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "min_cell") c.min_cell = v.get<std::size_t>();
      else if (key == "min_cell_subsample") c.min_cell_subsample = v.get<std::size_t>();
      else if (key == "optimizer") {
        for (const auto& [ok, ov] : v.items()) {
          if (ok == "fd_step") c.optimizer.fd_step = ov.get<double>();
          else if (ok == "rel_tol") c.optimizer.rel_tol = ov.get<double>();
          else if (ok == "max_iterations") c.optimizer.max_iterations = ov.get<int>();
          else if (ok == "multi_start") c.optimizer.multi_start = ov.get<bool>();
          else throw ValidationError("unknown optimizer key '" + ok + "'");
        }
      } else {
        throw ValidationError("unknown inference key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("inference config: ") + e.what());
  }
  c.validate();
  return c;
}

std::size_t default_subsample_size(double n) {
  return static_cast<std::size_t>(std::ceil(std::pow(n, 2.0 / 3.0) - 1e-9));
}

SubsampleSizes subsample_sizes(const TwoSampleDataset& data, std::optional<std::size_t> b_n) {
  const double n = data.effective_n();
  SubsampleSizes s;
  s.b_n = b_n ? *b_n : default_subsample_size(n);
  const std::size_t largest = std::max(data.n_y(), data.n_x());
  if (s.b_n > largest) throw ValidationError("subsample size exceeds the larger sample size");
  const double ratio = static_cast<double>(s.b_n) / static_cast<double>(largest);
  auto scaled = [&](std::size_t total) {
    const auto b = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
    return std::clamp<std::size_t>(b, std::min<std::size_t>(2, total), total);
  };
  s.b_y = scaled(data.n_y());
  s.b_x = scaled(data.n_x());
  return s;
}

double SubsampleDraws::quantile(std::size_t j, double t) const {
  if (!std::isfinite(estimate.at(j))) return 0.0;
  return sample_quantile(draws.at(j), t);
}

SubsampleDraws run_subsampling(std::vector<double> estimate, const SubsampleSizes& sizes, int replications,
                               std::uint64_t seed, const std::function<std::vector<double>(Rng&)>& replicate) {
  const std::size_t m = estimate.size();
  const auto reps = static_cast<std::size_t>(replications);
  std::vector<std::vector<double>> values(reps);
  std::vector<char> ok(reps, 0);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    try {
      auto v = replicate(rng);
      if (v.size() != m) return;
      values[r] = std::move(v);
      ok[r] = 1;
    } catch (const std::exception&) {
      // dropped replication
    }
  });

  SubsampleDraws out;
  out.sizes = sizes;
  out.replications = replications;
  out.draws.assign(m, {});
  const double scale = std::sqrt(static_cast<double>(sizes.b_n));
  for (std::size_t r = 0; r < reps; ++r) {
    if (!ok[r]) {
      ++out.dropped;
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double d = values[r][j] - estimate[j];
      out.draws[j].push_back(std::isnan(d) ? 0.0 : scale * d);
    }
  }
  if (out.dropped == replications) throw NumericalError("every subsampling replication failed");
  out.estimate = std::move(estimate);
  return out;
}

SubsampleDraws subsample_statistic(const TwoSampleDataset& data, const StatisticEvaluator& statistic,
                                   const InferenceConfig& config) {
  config.validate();
  return subsample_statistic(data, statistic(data), statistic, config);
}

SubsampleDraws subsample_statistic(const TwoSampleDataset& data, std::vector<double> estimate,
                                   const StatisticEvaluator& statistic, const InferenceConfig& config) {
  config.validate();
  const SubsampleSizes sizes = subsample_sizes(data, config.b_n);
  return run_subsampling(std::move(estimate), sizes, config.replications, config.seed, [&](Rng& rng) {
    auto yr = sample_without_replacement(rng, data.n_y(), sizes.b_y);
    auto xr = sample_without_replacement(rng, data.n_x(), sizes.b_x);
    std::sort(yr.begin(), yr.end());
    std::sort(xr.begin(), xr.end());
    return statistic(data.subset(yr, xr));
  });
}

TwoSampleDataset retained_rows(const TwoSampleDataset& data, std::size_t min_cell) {
  const CellPartition part = residualize(data, min_cell);
  std::vector<char> keep(data.cells.size(), 0);
  for (const auto& c : part.cells()) keep[static_cast<std::size_t>(c.dataset_index)] = 1;
  std::vector<std::size_t> yr;
  std::vector<std::size_t> xr;
  for (std::size_t i = 0; i < data.n_y(); ++i) {
    if (keep[static_cast<std::size_t>(data.y_cell[i])]) yr.push_back(i);
  }
  for (std::size_t i = 0; i < data.n_x(); ++i) {
    if (keep[static_cast<std::size_t>(data.x_cell[i])]) xr.push_back(i);
  }
  if (yr.size() == data.n_y() && xr.size() == data.n_x()) return data;
  return data.subset(yr, xr);
}

}  // namespace combreg
