#ifndef PAIRBENCH_MODEL_HPP
#define PAIRBENCH_MODEL_HPP

#include <cstdint>
#include <vector>

namespace pairbench {

/// Latent quality scores indexed by stimulus id. Scores produced by fit_bt
/// are centered to sum zero.
using ScoreVector = std::vector<double>;

/// Elo ratings indexed by stimulus id. Updates are zero-sum.
using EloRatings = std::vector<double>;

inline constexpr double kEloInitialRating = 1500.0;
inline constexpr double kEloKFactor = 32.0;

/// n x n tally of pairwise wins; count(i, j) is the number of comparisons
/// won by i against j. The sufficient statistic for Bradley-Terry fitting.
class WinMatrix {
public:
  explicit WinMatrix(int n);

  int size() const { return n_; }
  std::int64_t count(int winner, int loser) const;
  void add_win(int winner, int loser, std::int64_t times = 1);
  /// Comparisons recorded between i and j in either direction.
  std::int64_t games(int i, int j) const;
  std::int64_t total() const;

private:
  void check_ids(int i, int j) const;

  int n_;
  std::vector<std::int64_t> counts_;
};

/// P(i beats j) under the Bradley-Terry model, exp(s_i)/(exp(s_i)+exp(s_j)),
/// evaluated as a logistic of the score difference for stability. The result
/// is clamped to the open interval (0,1).
double bt_win_probability(double s_i, double s_j);

/// P(i beats j) under Thurstone's model, Phi((mu_i-mu_j)/sqrt(si^2+sj^2)).
/// Fitting this model is out of scope; evaluation only.
double thurstone_win_probability(double mu_i, double mu_j, double sigma_i,
                                 double sigma_j);

/// Log-likelihood of centered-or-not scores given a win matrix, with
/// prior_strength virtual wins added in both directions for every pair.
double bt_log_likelihood(const ScoreVector& scores, const WinMatrix& wins,
                         double prior_strength);

/// Gradient of bt_log_likelihood with respect to the scores.
ScoreVector bt_log_likelihood_gradient(const ScoreVector& scores,
                                       const WinMatrix& wins,
                                       double prior_strength);

/// Per-stimulus variances from the Laplace approximation at the given
/// scores: diagonal of the pseudo-inverse of the negated Hessian of the
/// regularized log-likelihood, taken on the sum-zero gauge.
std::vector<double> bt_laplace_variances(const ScoreVector& scores,
                                         const WinMatrix& wins,
                                         double prior_strength);

/// Maximum-likelihood Bradley-Terry scores by minorization-maximization.
/// prior_strength virtual wins per ordered pair regularize degenerate
/// records. Converges when the largest centered-score change in one sweep
/// drops below 1e-9, capped at 10,000 sweeps. Result sums to zero.
ScoreVector fit_bt(const WinMatrix& wins, double prior_strength);

/// Standard Elo update, K = 32, logistic base 10 with scale 400. The winner
/// gains K*(1 - E_winner) and the loser loses the same amount.
EloRatings elo_update(const EloRatings& ratings, int i, int j, int winner);

struct AlignResult {
  ScoreVector values;
  bool degenerate = false; // constant input; values collapsed to mean(reference)
};

/// Fits a monotone non-decreasing 4-parameter logistic
/// g(x) = a + b/(1+exp(-c(x-d))), b >= 0, c >= 0, mapping `estimated` onto
/// `reference` by multi-start least squares, and returns g applied
/// elementwise. Falls back to the best non-decreasing affine map when that
/// fits no worse. Requires at least 4 points.
AlignResult sigmoid_align(const ScoreVector& estimated,
                          const ScoreVector& reference);

} // namespace pairbench

#endif // PAIRBENCH_MODEL_HPP
