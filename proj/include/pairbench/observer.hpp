#ifndef PAIRBENCH_OBSERVER_HPP
#define PAIRBENCH_OBSERVER_HPP

#include "pairbench/model.hpp"
#include "pairbench/rng.hpp"
#include "pairbench/samplers.hpp"

namespace pairbench {

/// Hidden state of a simulated session: true scores in [0,5], per-stimulus
/// observer noise, and the judgment-error probability.
struct GroundTruth {
  ScoreVector scores;
  std::vector<double> sigmas;
  double epsilon = 0.0;
};

/// Scores i.i.d. U(0,5) and noise levels i.i.d. U(0, sigma_max).
/// Deterministic given the stream.
GroundTruth generate_ground_truth(int n, double sigma_max, RngStream& rng,
                                  double epsilon = 0.0);

/// One simulated judgment: observed scores r ~ N(s, sigma) per stimulus, the
/// higher draw wins, and the result is flipped with probability epsilon.
/// Exact ties (possible only with zero noise) are broken uniformly.
ComparisonOutcome simulate_comparison(const GroundTruth& gt, int i, int j,
                                      RngStream& rng);

} // namespace pairbench

#endif // PAIRBENCH_OBSERVER_HPP
