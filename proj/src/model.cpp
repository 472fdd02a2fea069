#include "pairbench/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pairbench/errors.hpp"

namespace pairbench {

namespace {

constexpr int kMmMaxSweeps = 10000;
constexpr double kMmTolerance = 1e-9;

double stable_logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(logistic(t)) without overflow in either tail
double log_logistic(double t) {
  if (t >= 0.0)
    return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be finite");
}

} // namespace

WinMatrix::WinMatrix(int n) : n_(n) {
  if (n < 1)
    throw std::invalid_argument("WinMatrix: n must be >= 1");
  counts_.assign(static_cast<std::size_t>(n) * n, 0);
}

void WinMatrix::check_ids(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::invalid_argument("WinMatrix: stimulus id out of range");
  if (i == j)
    throw std::invalid_argument("WinMatrix: diagonal entries are not comparisons");
}

std::int64_t WinMatrix::count(int winner, int loser) const {
  check_ids(winner, loser);
  return counts_[static_cast<std::size_t>(winner) * n_ + loser];
}

void WinMatrix::add_win(int winner, int loser, std::int64_t times) {
  check_ids(winner, loser);
  if (times < 0)
    throw std::invalid_argument("WinMatrix: negative win count");
  counts_[static_cast<std::size_t>(winner) * n_ + loser] += times;
}

std::int64_t WinMatrix::games(int i, int j) const {
  return count(i, j) + count(j, i);
}

std::int64_t WinMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

double bt_win_probability(double s_i, double s_j) {
  require_finite(s_i, "s_i");
  require_finite(s_j, "s_j");
  const double p = stable_logistic(s_i - s_j);
  // keep the result inside the open interval even for extreme differences
  return std::clamp(p, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon() / 2);
}

double thurstone_win_probability(double mu_i, double mu_j, double sigma_i,
                                 double sigma_j) {
  require_finite(mu_i, "mu_i");
  require_finite(mu_j, "mu_j");
  require_finite(sigma_i, "sigma_i");
  require_finite(sigma_j, "sigma_j");
  if (sigma_i < 0.0 || sigma_j < 0.0)
    throw std::invalid_argument("thurstone_win_probability: negative sigma");
  const double var = sigma_i * sigma_i + sigma_j * sigma_j;
  if (var <= 0.0)
    throw DegenerateVarianceError(
        "thurstone_win_probability: both sigmas are zero");
  const double z = (mu_i - mu_j) / std::sqrt(var);
  const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return std::clamp(p, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon() / 2);
}

double bt_log_likelihood(const ScoreVector& scores, const WinMatrix& wins,
                         double prior_strength) {
  const int n = wins.size();
  if (static_cast<int>(scores.size()) != n)
    throw std::invalid_argument("bt_log_likelihood: size mismatch");
  if (prior_strength < 0.0)
    throw std::invalid_argument("bt_log_likelihood: negative prior_strength");
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double w = static_cast<double>(wins.count(i, j)) + prior_strength;
      if (w > 0.0)
        ll += w * log_logistic(scores[i] - scores[j]);
    }
  }
  return ll;
}

ScoreVector bt_log_likelihood_gradient(const ScoreVector& scores,
                                       const WinMatrix& wins,
                                       double prior_strength) {
  const int n = wins.size();
  if (static_cast<int>(scores.size()) != n)
    throw std::invalid_argument("bt_log_likelihood_gradient: size mismatch");
  if (prior_strength < 0.0)
    throw std::invalid_argument(
        "bt_log_likelihood_gradient: negative prior_strength");
  ScoreVector grad(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double wij = static_cast<double>(wins.count(i, j)) + prior_strength;
      const double wji = static_cast<double>(wins.count(j, i)) + prior_strength;
      const double pij = stable_logistic(scores[i] - scores[j]);
      // d/ds_i [wij*log p + wji*log(1-p)] = wij - (wij+wji)*p
      const double g = wij - (wij + wji) * pij;
      grad[i] += g;
      grad[j] -= g;
    }
  }
  return grad;
}

std::vector<double> bt_laplace_variances(const ScoreVector& scores,
                                         const WinMatrix& wins,
                                         double prior_strength) {
  const int n = wins.size();
  if (static_cast<int>(scores.size()) != n)
    throw std::invalid_argument("bt_laplace_variances: size mismatch");
  if (prior_strength < 0.0)
    throw std::invalid_argument("bt_laplace_variances: negative prior_strength");

  // M = -Hessian + ones/n. The Hessian of the BT log-likelihood is singular
  // along the all-ones direction (translation gauge); adding ones/n makes M
  // invertible and M^-1 = H^+ + ones/n on the complement, so the pseudo-
  // inverse diagonal is recovered by subtracting 1/n afterwards.
  std::vector<double> m(static_cast<std::size_t>(n) * n, 1.0 / n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double games = static_cast<double>(wins.games(i, j)) +
                           2.0 * prior_strength;
      const double p = stable_logistic(scores[i] - scores[j]);
      const double info = games * p * (1.0 - p);
      m[static_cast<std::size_t>(i) * n + i] += info;
      m[static_cast<std::size_t>(j) * n + j] += info;
      m[static_cast<std::size_t>(i) * n + j] -= info;
      m[static_cast<std::size_t>(j) * n + i] -= info;
    }
  }

  // Gauss-Jordan inverse with partial pivoting; n stays small (<= dozens).
  std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    inv[static_cast<std::size_t>(i) * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[static_cast<std::size_t>(r) * n + col]) >
          std::abs(m[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    }
    if (std::abs(m[static_cast<std::size_t>(pivot) * n + col]) < 1e-300)
      throw std::runtime_error("bt_laplace_variances: singular information matrix");
    if (pivot != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(m[static_cast<std::size_t>(pivot) * n + k],
                  m[static_cast<std::size_t>(col) * n + k]);
        std::swap(inv[static_cast<std::size_t>(pivot) * n + k],
                  inv[static_cast<std::size_t>(col) * n + k]);
      }
    }
    const double d = m[static_cast<std::size_t>(col) * n + col];
    for (int k = 0; k < n; ++k) {
      m[static_cast<std::size_t>(col) * n + k] /= d;
      inv[static_cast<std::size_t>(col) * n + k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col)
        continue;
      const double f = m[static_cast<std::size_t>(r) * n + col];
      if (f == 0.0)
        continue;
      for (int k = 0; k < n; ++k) {
        m[static_cast<std::size_t>(r) * n + k] -=
            f * m[static_cast<std::size_t>(col) * n + k];
        inv[static_cast<std::size_t>(r) * n + k] -=
            f * inv[static_cast<std::size_t>(col) * n + k];
      }
    }
  }

  std::vector<double> variances(n);
  for (int i = 0; i < n; ++i) {
    variances[i] =
        std::max(0.0, inv[static_cast<std::size_t>(i) * n + i] - 1.0 / n);
  }
  return variances;
}

ScoreVector fit_bt(const WinMatrix& wins, double prior_strength) {
  const int n = wins.size();
  if (n < 2)
    throw std::invalid_argument("fit_bt: need at least 2 stimuli");
  if (prior_strength < 0.0)
    throw std::invalid_argument("fit_bt: negative prior_strength");
  if (wins.total() == 0 && prior_strength == 0.0)
    throw UnidentifiableModelError("fit_bt: no comparisons and no prior");

  // Minorization-maximization (Zermelo/Hunter iteration) in gamma space:
  //   gamma_i <- W_i / sum_j N_ij / (gamma_i + gamma_j)
  // with prior wins folded into W and N.
  std::vector<double> total_wins(n, prior_strength * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        total_wins[i] += static_cast<double>(wins.count(i, j));

  std::vector<double> gamma(n, 1.0);
  ScoreVector scores(n, 0.0);
  for (int sweep = 0; sweep < kMmMaxSweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      double denom = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i)
          continue;
        const double games =
            static_cast<double>(wins.games(i, j)) + 2.0 * prior_strength;
        if (games > 0.0)
          denom += games / (gamma[i] + gamma[j]);
      }
      gamma[i] = denom > 0.0 ? std::max(total_wins[i] / denom, 1e-300) : 1.0;
    }

    // recenter (sum of logs = 0) to keep the iteration from drifting
    double mean_log = 0.0;
    for (int i = 0; i < n; ++i)
      mean_log += std::log(gamma[i]);
    mean_log /= n;
    const double scale = std::exp(-mean_log);

    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      gamma[i] *= scale;
      const double s = std::log(gamma[i]);
      max_change = std::max(max_change, std::abs(s - scores[i]));
      scores[i] = s;
    }
    if (max_change < kMmTolerance)
      break;
  }
  return scores;
}

EloRatings elo_update(const EloRatings& ratings, int i, int j, int winner) {
  const int n = static_cast<int>(ratings.size());
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::invalid_argument("elo_update: stimulus id out of range");
  if (i == j)
    throw std::invalid_argument("elo_update: i and j must differ");
  if (winner != i && winner != j)
    throw std::invalid_argument("elo_update: winner must be i or j");

  const int loser = (winner == i) ? j : i;
  const double expected_winner =
      1.0 / (1.0 + std::pow(10.0, (ratings[loser] - ratings[winner]) / 400.0));
  const double delta = kEloKFactor * (1.0 - expected_winner);

  EloRatings out = ratings;
  out[winner] += delta;
  out[loser] -= delta;
  return out;
}

namespace {

struct LogisticFit {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double logistic_sse(const LogisticFit& f, const ScoreVector& x,
                    const ScoreVector& y) {
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = f.a + f.b * stable_logistic(f.c * (x[k] - f.d)) - y[k];
    sse += r * r;
  }
  return sse;
}

// For fixed (c, d), the optimal (a, b) solves a 2x2 least-squares system;
// b is clamped at zero to keep the map non-decreasing.
void solve_linear_part(LogisticFit& f, const ScoreVector& x,
                       const ScoreVector& y) {
  const std::size_t n = x.size();
  double sz = 0.0, szz = 0.0, sy = 0.0, szy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = stable_logistic(f.c * (x[k] - f.d));
    sz += z;
    szz += z * z;
    sy += y[k];
    szy += z * y[k];
  }
  const double denom = n * szz - sz * sz;
  double b = denom > 1e-12 ? (n * szy - sz * sy) / denom : 0.0;
  if (b < 0.0)
    b = 0.0;
  f.b = b;
  f.a = (sy - b * sz) / n;
}

// Projected Levenberg-Marquardt on (a, b, c, d); b and c stay >= 0.
void lm_refine(LogisticFit& f, const ScoreVector& x, const ScoreVector& y) {
  const std::size_t n = x.size();
  double lambda = 1e-3;
  f.sse = logistic_sse(f, x, y);
  for (int iter = 0; iter < 80; ++iter) {
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (std::size_t k = 0; k < n; ++k) {
      const double s = stable_logistic(f.c * (x[k] - f.d));
      const double sp = s * (1.0 - s);
      const double r = f.a + f.b * s - y[k];
      const double jac[4] = {1.0, s, f.b * sp * (x[k] - f.d), -f.b * f.c * sp};
      for (int p = 0; p < 4; ++p) {
        jtr[p] += jac[p] * r;
        for (int q = 0; q < 4; ++q)
          jtj[p][q] += jac[p] * jac[q];
      }
    }

    // solve (JtJ + lambda*diag) step = -Jtr by Gaussian elimination
    double m[4][5];
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q)
        m[p][q] = jtj[p][q] + (p == q ? lambda * (1.0 + jtj[p][p]) : 0.0);
      m[p][4] = -jtr[p];
    }
    bool singular = false;
    for (int col = 0; col < 4 && !singular; ++col) {
      int pivot = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::abs(m[r][col]) > std::abs(m[pivot][col]))
          pivot = r;
      if (std::abs(m[pivot][col]) < 1e-14) {
        singular = true;
        break;
      }
      if (pivot != col)
        for (int k2 = col; k2 < 5; ++k2)
          std::swap(m[pivot][k2], m[col][k2]);
      for (int r = 0; r < 4; ++r) {
        if (r == col)
          continue;
        const double fac = m[r][col] / m[col][col];
        for (int k2 = col; k2 < 5; ++k2)
          m[r][k2] -= fac * m[col][k2];
      }
    }
    if (singular) {
      lambda *= 4.0;
      if (lambda > 1e12)
        break;
      continue;
    }

    LogisticFit trial = f;
    trial.a += m[0][4] / m[0][0];
    trial.b = std::max(0.0, trial.b + m[1][4] / m[1][1]);
    trial.c = std::max(0.0, trial.c + m[2][4] / m[2][2]);
    trial.d += m[3][4] / m[3][3];
    trial.sse = logistic_sse(trial, x, y);

    if (std::isfinite(trial.sse) && trial.sse < f.sse) {
      const double rel = (f.sse - trial.sse) / std::max(f.sse, 1e-30);
      f = trial;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (rel < 1e-12)
        break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e12)
        break;
    }
  }
}

} // namespace

AlignResult sigmoid_align(const ScoreVector& estimated,
                          const ScoreVector& reference) {
  const std::size_t n = estimated.size();
  if (n != reference.size())
    throw std::invalid_argument("sigmoid_align: size mismatch");
  if (n < 4)
    throw TooFewPointsError("sigmoid_align: need at least 4 points");
  for (double v : estimated)
    require_finite(v, "estimated");
  for (double v : reference)
    require_finite(v, "reference");

  const auto [min_it, max_it] =
      std::minmax_element(estimated.begin(), estimated.end());
  const double lo = *min_it, hi = *max_it;
  const double range = hi - lo;
  const double mean_ref =
      std::accumulate(reference.begin(), reference.end(), 0.0) / n;

  if (range < 1e-12) {
    AlignResult out;
    out.values.assign(n, mean_ref);
    out.degenerate = true;
    return out;
  }

  // Affine baseline with slope clamped at zero (the logistic family only
  // reaches non-decreasing maps, so the comparable affine fit is the
  // constrained one).
  double mean_x = std::accumulate(estimated.begin(), estimated.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (estimated[k] - mean_x) * (estimated[k] - mean_x);
    sxy += (estimated[k] - mean_x) * (reference[k] - mean_ref);
  }
  double affine_slope = std::max(0.0, sxy / sxx);
  double affine_icept = mean_ref - affine_slope * mean_x;
  double affine_sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = affine_icept + affine_slope * estimated[k] - reference[k];
    affine_sse += r * r;
  }

  // Multi-start over steepness and midpoint, then LM polish.
  static const double kSteepness[] = {0.1, 0.5, 1.0, 2.0, 4.0,
                                      8.0, 20.0, 50.0, 120.0};
  static const double kMidpointFrac[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  LogisticFit best;
  for (double steep : kSteepness) {
    for (double frac : kMidpointFrac) {
      LogisticFit f;
      f.c = steep / range;
      f.d = lo + frac * range;
      solve_linear_part(f, estimated, reference);
      lm_refine(f, estimated, reference);
      if (f.sse < best.sse)
        best = f;
    }
  }

  AlignResult out;
  out.values.resize(n);
  if (best.sse <= affine_sse) {
    for (std::size_t k = 0; k < n; ++k)
      out.values[k] =
          best.a + best.b * stable_logistic(best.c * (estimated[k] - best.d));
  } else {
    for (std::size_t k = 0; k < n; ++k)
      out.values[k] = affine_icept + affine_slope * estimated[k];
  }
  return out;
}

} // namespace pairbench
