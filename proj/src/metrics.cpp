#include "pairbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pairbench/errors.hpp"

namespace pairbench {

namespace {

void check_correlation_inputs(std::span<const double> a,
                              std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("correlation: size mismatch");
  if (a.size() < 3)
    throw std::invalid_argument("correlation: need at least 3 points");
}

} // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  check_correlation_inputs(a, b);
  const std::size_t n = a.size();
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a[k] - mean_a;
    const double db = b[k] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw UndefinedCorrelationError("pearson: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t k = 0;
  while (k < n) {
    std::size_t j = k;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[k]])
      ++j;
    const double rank = 0.5 * static_cast<double>(k + j) + 1.0; // 1-based mid-rank
    for (std::size_t t = k; t <= j; ++t)
      ranks[idx[t]] = rank;
    k = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_correlation_inputs(a, b);
  const std::vector<double> ra = midranks(a);
  const std::vector<double> rb = midranks(b);
  return pearson(ra, rb);
}

double rmse_aligned(const ScoreVector& estimated,
                    const ScoreVector& reference) {
  const AlignResult aligned = sigmoid_align(estimated, reference);
  double sse = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double r = aligned.values[k] - reference[k];
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(reference.size()));
}

ConfidenceInterval bootstrap_ci(std::span<const double> samples, double level,
                                int resamples, RngStream& rng) {
  if (samples.empty())
    throw std::invalid_argument("bootstrap_ci: empty samples");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");
  if (resamples < 100)
    throw std::invalid_argument("bootstrap_ci: need at least 100 resamples");

  const std::size_t n = samples.size();
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      sum += samples[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)];
    means[r] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(resamples - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min<std::size_t>(lo + 1, resamples - 1);
    const double frac = h - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  const double tail = (1.0 - level) / 2.0;
  return ConfidenceInterval{quantile(tail), quantile(1.0 - tail)};
}

} // namespace pairbench
