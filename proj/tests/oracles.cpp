#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pairbench::oracles {

namespace {

double logistic(double t) {
  if (t >= 0.0)
    return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// golden-section maximization of f over [lo, hi]
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

} // namespace

double bt_log_likelihood_oracle(const ScoreVector& scores,
                                const WinMatrix& wins, double prior_strength) {
  const int n = wins.size();
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double w = static_cast<double>(wins.count(i, j)) + prior_strength;
      if (w > 0.0)
        ll += w * std::log(logistic(scores[i] - scores[j]));
    }
  }
  return ll;
}

ScoreVector bt_fit_oracle(const WinMatrix& wins, double prior_strength) {
  const int n = wins.size();
  if (n < 2 || n > 3)
    throw std::invalid_argument("bt_fit_oracle: only n in {2,3} supported");

  // anchor the last score at zero and sweep the free coordinates
  ScoreVector s(n, 0.0);
  const double limit = 40.0;
  for (int sweep = 0; sweep < 300; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      const double old = s[i];
      s[i] = golden_max(
          [&](double v) {
            ScoreVector t = s;
            t[i] = v;
            return bt_log_likelihood_oracle(t, wins, prior_strength);
          },
          -limit, limit, 1e-10);
      change = std::max(change, std::abs(s[i] - old));
    }
    if (change < 1e-9)
      break;
  }
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  for (double& v : s)
    v -= mean;
  return s;
}

bool bt_identifiable(const WinMatrix& wins) {
  const int n = wins.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    reach[i][i] = 1;
    for (int j = 0; j < n; ++j)
      if (i != j && wins.count(i, j) > 0)
        reach[i][j] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j])
          reach[i][j] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach[i][j])
        return false;
  return true;
}

double edge_set_weight(const std::vector<Pair>& edges,
                       const std::map<Pair, double>& weights) {
  double total = 0.0;
  for (const Pair& p : edges)
    total += weights.at(p);
  return total;
}

std::vector<Pair> mst_edges_oracle(int n,
                                   const std::map<Pair, double>& weights) {
  if (n < 2)
    throw std::invalid_argument("mst_edges_oracle: need n >= 2");
  if (n == 2)
    return {Pair{0, 1}};

  // enumerate all labelled trees by decoding every Prufer sequence
  const int seq_len = n - 2;
  std::vector<int> seq(seq_len, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Pair> best_edges;
  for (;;) {
    std::vector<int> deg(n, 1);
    for (int v : seq)
      ++deg[v];
    double total = 0.0;
    std::vector<Pair> edges;
    edges.reserve(n - 1);
    for (int k = 0; k < seq_len; ++k) {
      int leaf = -1;
      for (int v = 0; v < n; ++v) {
        if (deg[v] == 1) {
          leaf = v;
          break;
        }
      }
      const int a = seq[k];
      const Pair e = leaf < a ? Pair{leaf, a} : Pair{a, leaf};
      total += weights.at(e);
      edges.push_back(e);
      --deg[leaf];
      --deg[a];
    }
    int u = -1, v = -1;
    for (int w = 0; w < n; ++w) {
      if (deg[w] == 1) {
        if (u < 0)
          u = w;
        else
          v = w;
      }
    }
    const Pair last = u < v ? Pair{u, v} : Pair{v, u};
    total += weights.at(last);
    edges.push_back(last);
    if (total < best) {
      best = total;
      best_edges = std::move(edges);
    }

    int pos = seq_len - 1;
    while (pos >= 0 && seq[pos] == n - 1)
      seq[pos--] = 0;
    if (pos < 0)
      break;
    ++seq[pos];
  }
  std::sort(best_edges.begin(), best_edges.end());
  return best_edges;
}

double mst_total_weight_oracle(int n, const std::map<Pair, double>& weights) {
  return edge_set_weight(mst_edges_oracle(n, weights), weights);
}

double eig_oracle(const PosteriorApprox& posterior, int i, int j) {
  const double mu = posterior.mean[i] - posterior.mean[j];
  const double var = posterior.variance[i] + posterior.variance[j];
  const double sd = std::sqrt(var);
  if (sd < 1e-12)
    return 0.0; // no score uncertainty, no information to gain

  // expected KL, computed literally as sum_o P(o) * KL(post_o || prior)
  // over a dense trapezoid grid
  const int points = 20001;
  const double lo = mu - 12.0 * sd - 1e-9;
  const double hi = mu + 12.0 * sd + 1e-9;
  const double h = (hi - lo) / (points - 1);
  const double norm = 1.0 / (sd * std::sqrt(2.0 * 3.14159265358979323846));

  double p_win = 0.0, int_plogp_win = 0.0;
  double p_lose = 0.0, int_plogp_lose = 0.0;
  for (int k = 0; k < points; ++k) {
    const double d = lo + k * h;
    const double z = (d - mu) / sd;
    const double pdf = norm * std::exp(-0.5 * z * z);
    const double w = (k == 0 || k == points - 1) ? 0.5 * h : h;
    const double p = logistic(d);
    const double q = 1.0 - p;
    p_win += w * pdf * p;
    p_lose += w * pdf * q;
    if (p > 0.0)
      int_plogp_win += w * pdf * p * std::log(p);
    if (q > 0.0)
      int_plogp_lose += w * pdf * q * std::log(q);
  }
  const double kl_win = int_plogp_win / p_win - std::log(p_win);
  const double kl_lose = int_plogp_lose / p_lose - std::log(p_lose);
  return p_win * kl_win + p_lose * kl_lose;
}

} // namespace pairbench::oracles
