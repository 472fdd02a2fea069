#ifndef PAIRBENCH_METRICS_HPP
#define PAIRBENCH_METRICS_HPP

#include <span>
#include <vector>

#include "pairbench/model.hpp"
#include "pairbench/rng.hpp"

namespace pairbench {

/// Product-moment correlation. Requires length >= 3 and non-constant inputs.
double pearson(std::span<const double> a, std::span<const double> b);

/// Rank-order correlation: Pearson over mid-ranks (ties get average ranks).
double spearman(std::span<const double> a, std::span<const double> b);

/// Mid-rank vector (1-based, average ranks for ties).
std::vector<double> midranks(std::span<const double> values);

/// RMSE against `reference` after sigmoid_align maps `estimated` onto its
/// scale.
double rmse_aligned(const ScoreVector& estimated, const ScoreVector& reference);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap CI of the mean: resample with replacement, take
/// means, return the (1-level)/2 and 1-(1-level)/2 empirical quantiles.
ConfidenceInterval bootstrap_ci(std::span<const double> samples, double level,
                                int resamples, RngStream& rng);

} // namespace pairbench

#endif // PAIRBENCH_METRICS_HPP
