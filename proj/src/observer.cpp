#include "pairbench/observer.hpp"

#include <cmath>
#include <stdexcept>

namespace pairbench {

GroundTruth generate_ground_truth(int n, double sigma_max, RngStream& rng,
                                  double epsilon) {
  if (n < 2)
    throw std::invalid_argument("generate_ground_truth: need n >= 2");
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max))
    throw std::invalid_argument("generate_ground_truth: sigma_max must be > 0");
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("generate_ground_truth: epsilon must be in [0,1)");

  GroundTruth gt;
  gt.scores.resize(n);
  gt.sigmas.resize(n);
  gt.epsilon = epsilon;
  for (int i = 0; i < n; ++i)
    gt.scores[i] = rng.uniform(0.0, 5.0);
  for (int i = 0; i < n; ++i)
    gt.sigmas[i] = rng.uniform(0.0, sigma_max);
  return gt;
}

ComparisonOutcome simulate_comparison(const GroundTruth& gt, int i, int j,
                                      RngStream& rng) {
  const int n = static_cast<int>(gt.scores.size());
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::invalid_argument("simulate_comparison: id out of range");
  if (i == j)
    throw std::invalid_argument("simulate_comparison: i and j must differ");

  const double r_i = rng.normal(gt.scores[i], gt.sigmas[i]);
  const double r_j = rng.normal(gt.scores[j], gt.sigmas[j]);
  int winner;
  if (r_i > r_j)
    winner = i;
  else if (r_j > r_i)
    winner = j;
  else
    winner = rng.bernoulli(0.5) ? i : j; // exact tie, zero-noise corner
  if (rng.uniform() < gt.epsilon)
    winner = winner == i ? j : i;
  return ComparisonOutcome{make_pair(i, j), winner};
}

} // namespace pairbench
