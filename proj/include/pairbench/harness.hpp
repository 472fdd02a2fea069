#ifndef PAIRBENCH_HARNESS_HPP
#define PAIRBENCH_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairbench/metrics.hpp"
#include "pairbench/model.hpp"
#include "pairbench/observer.hpp"
#include "pairbench/samplers.hpp"

namespace pairbench {

struct ExperimentConfig {
  int n = 8;
  double sigma_max = 0.7;
  double epsilon = 0.1;
  std::vector<SamplerKind> samplers{kAllSamplerKinds,
                                    kAllSamplerKinds + 6};
  int trials = 15;   // standard trials; budget = trials * n(n-1)/2
  int repeats = 100;
  std::uint64_t seed = 1;
  double prior_strength = 0.1;
  int jobs = 1; // 0 = one worker per hardware thread
  int bootstrap_resamples = 1000;
  std::string output_path = "results.csv";
};

void validate_config(const ExperimentConfig& config);

/// Parses a flat key=value config file ('#' starts a comment). Keys match
/// the CLI flag names: n, sigma_max, epsilon, samplers, trials, repeats,
/// seed, prior_strength, jobs, out.
ExperimentConfig load_config_file(const std::string& path);

struct CheckpointSchedule {
  std::int64_t budget = 0;   // trials * n(n-1)/2
  std::int64_t interval = 0; // round(n(n-1)/8), at least 1
  std::vector<std::int64_t> checkpoints;
};

CheckpointSchedule checkpoint_schedule(int n, int trials);

/// Metrics of one repeat at one checkpoint. A metric is absent when it is
/// undefined there (constant fit, or too few stimuli); absent points are
/// excluded from aggregation rather than recorded as zero.
struct MetricPoint {
  std::int64_t comparisons_used = 0;
  std::optional<double> pcc;
  std::optional<double> rocc;
  std::optional<double> rmse;
};

struct MetricStat {
  std::optional<double> mean;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  int repeats_valid = 0;
};

struct SeriesPoint {
  std::int64_t comparisons = 0;
  MetricStat pcc;
  MetricStat rocc;
  MetricStat rmse;
};

/// Per-sampler trajectory, aggregated over repeats with 95% bootstrap CIs.
struct MetricSeries {
  SamplerKind kind = SamplerKind::kRandom;
  int n = 0;
  double sigma_max = 0.0;
  double epsilon = 0.0;
  int repeats = 0;
  std::vector<SeriesPoint> points;
};

/// One full simulated session: draw ground truth from the repeat's
/// substream, loop next_pair / simulate_comparison / record_outcome, and
/// refit BT at every checkpoint. Deterministic given (config, kind, repeat).
std::vector<MetricPoint> run_repeat(const ExperimentConfig& config,
                                    SamplerKind kind, int repeat_index);

/// Runs repeats x samplers sessions (in parallel when config.jobs != 1) and
/// aggregates. Output is identical for any execution order or job count.
std::vector<MetricSeries> run_experiment(const ExperimentConfig& config);

void export_results(const std::vector<MetricSeries>& series,
                    const std::string& path);

struct ResultRow {
  std::string sampler;
  int n = 0;
  double sigma_max = 0.0;
  double epsilon = 0.0;
  std::int64_t comparisons = 0;
  std::string metric;
  std::optional<double> mean;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  int repeats_valid = 0;
};

std::vector<ResultRow> import_results(const std::string& path);

/// Reads a comparison list CSV with mandatory header `i,j,winner` into a
/// win matrix; n is inferred from the largest id unless given.
WinMatrix read_comparisons_csv(const std::string& path, int n = 0);

} // namespace pairbench

#endif // PAIRBENCH_HARNESS_HPP
