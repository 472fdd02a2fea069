#include "pairbench/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pairbench/errors.hpp"

namespace pairbench {

Pair make_pair(int a, int b) {
  if (a < 0 || b < 0)
    throw std::invalid_argument("Pair: negative stimulus id");
  if (a == b)
    throw std::invalid_argument("Pair: stimuli must differ");
  return a < b ? Pair{a, b} : Pair{b, a};
}

const char* to_string(SamplerKind kind) {
  switch (kind) {
  case SamplerKind::kRandom:
    return "random";
  case SamplerKind::kKnockout:
    return "knockout";
  case SamplerKind::kSwiss:
    return "swiss";
  case SamplerKind::kTreeSelect:
    return "tree-select";
  case SamplerKind::kSortMst:
    return "sort-mst";
  case SamplerKind::kHybridMst:
    return "hybrid-mst";
  }
  return "?";
}

std::optional<SamplerKind> sampler_kind_from_string(std::string_view name) {
  for (SamplerKind kind : kAllSamplerKinds)
    if (name == to_string(kind))
      return kind;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Minimum spanning tree (Kruskal, canonical tie-break)

namespace {

int uf_find(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

} // namespace

std::vector<Pair> minimum_spanning_tree(int n,
                                        const std::map<Pair, double>& weights) {
  if (n < 2)
    throw std::invalid_argument("minimum_spanning_tree: need n >= 2");
  std::vector<std::pair<double, Pair>> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto it = weights.find(Pair{i, j});
      if (it == weights.end() || !std::isfinite(it->second))
        throw std::invalid_argument("minimum_spanning_tree: missing edge weight");
      edges.emplace_back(it->second, Pair{i, j});
    }
  }
  std::sort(edges.begin(), edges.end()); // (weight, i, j) lexicographic

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<Pair> tree;
  tree.reserve(n - 1);
  for (const auto& [w, p] : edges) {
    const int a = uf_find(parent, p.i);
    const int b = uf_find(parent, p.j);
    if (a == b)
      continue;
    parent[a] = b;
    tree.push_back(p);
    if (static_cast<int>(tree.size()) == n - 1)
      break;
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

// ---------------------------------------------------------------------------
// Expected information gain

namespace {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for weight exp(-x^2): Newton iteration on the
// orthonormal recurrence. Nodes come out in symmetric +/- pairs.
Quadrature gauss_hermite(int n) {
  Quadrature q;
  q.nodes.assign(n, 0.0);
  q.weights.assign(n, 0.0);
  const double pim4 = 0.7511255444649425; // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * q.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * q.nodes[1];
    } else {
      z = 2.0 * z - q.nodes[i - 2];
    }
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14)
        break;
    }
    q.nodes[i] = z;
    q.nodes[n - 1 - i] = -z;
    q.weights[i] = 2.0 / (pp * pp);
    q.weights[n - 1 - i] = q.weights[i];
  }
  return q;
}

double binary_entropy(double p) {
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
}

} // namespace

double expected_information_gain(const PosteriorApprox& posterior, int i,
                                 int j) {
  const int n = static_cast<int>(posterior.mean.size());
  if (posterior.variance.size() != posterior.mean.size())
    throw std::invalid_argument("expected_information_gain: size mismatch");
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::invalid_argument("expected_information_gain: id out of range");
  if (i == j)
    throw std::invalid_argument("expected_information_gain: i and j must differ");

  // evaluate on the canonical orientation so EIG(i,j) == EIG(j,i) exactly
  const int lo = std::min(i, j), hi = std::max(i, j);
  const double mu = posterior.mean[lo] - posterior.mean[hi];
  const double var = posterior.variance[lo] + posterior.variance[hi];
  if (!(var >= 0.0) || !std::isfinite(mu) || !std::isfinite(var))
    throw std::invalid_argument("expected_information_gain: invalid posterior");

  static const Quadrature gh = gauss_hermite(16);
  const double scale = std::sqrt(2.0 * var);
  const double inv_sqrt_pi = 0.5641895835477563;

  // EIG = sum_o P(o) KL(post_o || prior) over the two outcomes, which
  // reduces to H(mean win probability) - E_d[H(win probability at d)].
  double p_marginal = 0.0;
  double entropy_cond = 0.0;
  for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
    const double d = mu + scale * gh.nodes[k];
    const double p = bt_win_probability(d, 0.0);
    p_marginal += gh.weights[k] * p;
    entropy_cond += gh.weights[k] * binary_entropy(p);
  }
  p_marginal = std::clamp(p_marginal * inv_sqrt_pi,
                          std::numeric_limits<double>::min(),
                          1.0 - std::numeric_limits<double>::epsilon() / 2);
  entropy_cond *= inv_sqrt_pi;
  return std::max(0.0, binary_entropy(p_marginal) - entropy_cond);
}

// ---------------------------------------------------------------------------
// Sampler base

Sampler::Sampler(SamplerKind kind, int n) : kind_(kind), n_(n) {
  if (n < 2)
    throw std::invalid_argument("sampler: need at least 2 stimuli");
}

Pair Sampler::next_pair(RngStream& rng) {
  if (pending_.empty()) {
    if (kind_ != SamplerKind::kRandom && !outstanding_.empty())
      throw InvalidStateError("sampler: refill requested mid-batch");
    std::vector<Pair> batch = refill(rng);
    if (batch.empty())
      throw InvalidStateError("sampler: generator produced an empty batch");
    for (const Pair& p : batch) {
      if (p.i < 0 || p.j >= n_ || p.i >= p.j)
        throw InvalidStateError("sampler: generator produced an invalid pair");
    }
    last_batch_ = batch;
    pending_.assign(batch.begin(), batch.end());
  }
  const Pair p = pending_.front();
  pending_.pop_front();
  if (kind_ != SamplerKind::kRandom)
    outstanding_.push_back(p);
  return p;
}

void Sampler::record_outcome(const ComparisonOutcome& outcome) {
  const Pair p = outcome.pair;
  if (p.i < 0 || p.j >= n_ || p.i >= p.j)
    throw std::invalid_argument("record_outcome: invalid pair");
  if (outcome.winner != p.i && outcome.winner != p.j)
    throw std::invalid_argument("record_outcome: winner not in pair");
  if (kind_ != SamplerKind::kRandom) {
    const auto it = std::find(outstanding_.begin(), outstanding_.end(), p);
    if (it == outstanding_.end())
      throw ProtocolViolationError(
          "record_outcome: pair was not issued by this sampler");
    outstanding_.erase(it);
  }
  history_.push_back(outcome);
  on_outcome(outcome);
}

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, int n,
                                      SamplerOptions options) {
  switch (kind) {
  case SamplerKind::kRandom:
    return std::make_unique<RandomSampler>(n);
  case SamplerKind::kKnockout:
    return std::make_unique<KnockoutSampler>(n);
  case SamplerKind::kSwiss:
    return std::make_unique<SwissSampler>(n);
  case SamplerKind::kTreeSelect:
    return std::make_unique<TreeSelectSampler>(n);
  case SamplerKind::kSortMst:
    return std::make_unique<SortMstSampler>(n);
  case SamplerKind::kHybridMst:
    return std::make_unique<HybridMstSampler>(n, options.prior_strength);
  }
  throw std::invalid_argument("make_sampler: unknown kind");
}

// ---------------------------------------------------------------------------
// Random

RandomSampler::RandomSampler(int n) : Sampler(SamplerKind::kRandom, n) {}

std::vector<Pair> RandomSampler::refill(RngStream& rng) {
  const int a = static_cast<int>(rng.uniform_int(0, n_ - 1));
  int b = static_cast<int>(rng.uniform_int(0, n_ - 2));
  if (b >= a)
    ++b;
  return {make_pair(a, b)};
}

void RandomSampler::on_outcome(const ComparisonOutcome&) {}

// ---------------------------------------------------------------------------
// Knockout

namespace {
constexpr int kBye = -1;
}

KnockoutSampler::KnockoutSampler(int n) : Sampler(SamplerKind::kKnockout, n) {}

void KnockoutSampler::seed_bracket(RngStream& rng) {
  int m = 1;
  while (m < n_)
    m <<= 1;
  round_.assign(m, kBye);
  for (int i = 0; i < n_; ++i)
    round_[i] = i;
  rng.shuffle(round_); // random seeding; byes land in random slots
}

std::vector<Pair> KnockoutSampler::refill(RngStream& rng) {
  for (;;) {
    if (round_.empty())
      seed_bracket(rng);
    const int half = static_cast<int>(round_.size()) / 2;
    next_round_.assign(half, kBye);
    match_slots_.clear();
    std::vector<Pair> matches;
    for (int s = 0; s < half; ++s) {
      const int a = round_[2 * s];
      const int b = round_[2 * s + 1];
      if (a >= 0 && b >= 0) {
        const Pair p = make_pair(a, b);
        matches.push_back(p);
        match_slots_[p] = s;
      } else {
        next_round_[s] = a >= 0 ? a : b; // bye advance (possibly bye vs bye)
      }
    }
    if (!matches.empty())
      return matches;
    round_ = next_round_;
    if (round_.size() == 1) { // decided without any match: cannot happen
      round_.clear();         // with n >= 2, but keep the loop total
      ++brackets_completed_;
    }
  }
}

void KnockoutSampler::on_outcome(const ComparisonOutcome& outcome) {
  const auto it = match_slots_.find(outcome.pair);
  if (it == match_slots_.end())
    throw ProtocolViolationError("knockout: outcome for an unissued match");
  next_round_[it->second] = outcome.winner;
  match_slots_.erase(it);
  if (match_slots_.empty() && pending_.empty() && outstanding_.empty()) {
    round_ = next_round_;
    if (round_.size() == 1) {
      round_.clear();
      ++brackets_completed_;
    }
  }
}

// ---------------------------------------------------------------------------
// Swiss

SwissSampler::SwissSampler(int n)
    : Sampler(SamplerKind::kSwiss, n),
      rounds_per_tournament_(std::bit_width(static_cast<unsigned>(n)) - 1 + 2) {
  reset_tournament();
}

void SwissSampler::reset_tournament() {
  wins_.assign(n_, 0);
  games_.assign(n_, 0);
  opponents_.assign(n_, {});
  had_bye_.assign(n_, 0);
  played_.clear();
  rounds_completed_ = 0;
}

double SwissSampler::opponent_match_win_rate(int id) const {
  const auto& opps = opponents_[id];
  if (opps.empty())
    return 0.5;
  double sum = 0.0;
  for (int o : opps)
    sum += games_[o] > 0 ? static_cast<double>(wins_[o]) / games_[o] : 0.5;
  return sum / static_cast<double>(opps.size());
}

namespace {

// Perfect matching over `order` with at most `repeats_left` previously
// played pairs, preferring standings-adjacent partners (DFS order). The
// budget bounds backtracking; the caller retries with a looser repeat
// allowance, which always terminates because an all-repeat matching is
// found greedily.
struct SwissMatcher {
  const std::vector<int>& order;
  const std::set<Pair>& played;
  std::vector<char> used;
  std::vector<Pair> result;
  long budget = 0;

  bool search(int repeats_left) {
    if (--budget < 0)
      return false;
    std::size_t a = 0;
    while (a < order.size() && used[a])
      ++a;
    if (a == order.size())
      return true;
    used[a] = 1;
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (used[b])
        continue;
      const Pair p = make_pair(order[a], order[b]);
      const bool repeat = played.count(p) > 0;
      if (repeat && repeats_left == 0)
        continue;
      used[b] = 1;
      result.push_back(p);
      if (search(repeats_left - (repeat ? 1 : 0)))
        return true;
      result.pop_back();
      used[b] = 0;
      if (budget < 0)
        break;
    }
    used[a] = 0;
    return false;
  }
};

} // namespace

std::vector<Pair> SwissSampler::refill(RngStream& rng) {
  if (rounds_completed_ >= rounds_per_tournament_) {
    ++tournaments_completed_;
    reset_tournament();
  }

  std::vector<double> omw(n_), tiebreak(n_);
  for (int i = 0; i < n_; ++i)
    omw[i] = opponent_match_win_rate(i);
  for (int i = 0; i < n_; ++i)
    tiebreak[i] = rng.uniform();

  std::vector<int> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (wins_[x] != wins_[y])
      return wins_[x] > wins_[y];
    if (omw[x] != omw[y])
      return omw[x] > omw[y];
    if (tiebreak[x] != tiebreak[y])
      return tiebreak[x] < tiebreak[y];
    return x < y;
  });

  if (n_ % 2 == 1) {
    // bye to the lowest-ranked stimulus that has not had one this tournament
    int bye = order.back();
    for (int k = n_ - 1; k >= 0; --k) {
      if (!had_bye_[order[k]]) {
        bye = order[k];
        break;
      }
    }
    had_bye_[bye] = 1;
    wins_[bye] += 1; // counted as a win for standings, no comparison issued
    games_[bye] += 1;
    order.erase(std::find(order.begin(), order.end(), bye));
  }

  SwissMatcher matcher{order, played_, std::vector<char>(order.size(), 0), {}, 0};
  const int max_repeats = static_cast<int>(order.size()) / 2;
  for (int repeats = 0; repeats <= max_repeats; ++repeats) {
    matcher.used.assign(order.size(), 0);
    matcher.result.clear();
    matcher.budget = 500000;
    if (matcher.search(repeats))
      break;
  }
  if (matcher.result.size() != order.size() / 2)
    throw InvalidStateError("swiss: failed to build a round pairing");

  for (const Pair& p : matcher.result) {
    if (!played_.insert(p).second)
      ++forced_repeats_;
  }
  return matcher.result;
}

void SwissSampler::on_outcome(const ComparisonOutcome& outcome) {
  const int winner = outcome.winner;
  const int loser = outcome.pair.i == winner ? outcome.pair.j : outcome.pair.i;
  wins_[winner] += 1;
  games_[winner] += 1;
  games_[loser] += 1;
  opponents_[winner].push_back(loser);
  opponents_[loser].push_back(winner);
  if (batch_fully_recorded())
    ++rounds_completed_;
}

// ---------------------------------------------------------------------------
// Tree selection

namespace {
constexpr int kEmptySlot = -1;
constexpr int kUndecided = -2;
}

TreeSelectSampler::TreeSelectSampler(int n)
    : Sampler(SamplerKind::kTreeSelect, n) {}

void TreeSelectSampler::seed_tree(RngStream& rng) {
  int m = 1;
  while (m < n_)
    m <<= 1;
  leaf_base_ = m;
  std::vector<int> entries(m, kEmptySlot);
  for (int i = 0; i < n_; ++i)
    entries[i] = i;
  rng.shuffle(entries);

  node_.assign(2 * m, kUndecided);
  leaf_of_.assign(n_, -1);
  for (int s = 0; s < m; ++s) {
    node_[m + s] = entries[s];
    if (entries[s] >= 0)
      leaf_of_[entries[s]] = m + s;
  }
  ranked_.clear();
}

void TreeSelectSampler::propagate_and_extract() {
  bool changed = true;
  while (changed) {
    changed = false;
    // children have larger indices, so a deep-to-shallow sweep settles all
    // bye advances in one pass
    for (int v = leaf_base_ - 1; v >= 1; --v) {
      if (node_[v] != kUndecided)
        continue;
      const int a = node_[2 * v];
      const int b = node_[2 * v + 1];
      if (a == kUndecided || b == kUndecided)
        continue;
      if (a == kEmptySlot || b == kEmptySlot) {
        node_[v] = a == kEmptySlot ? b : a;
        changed = true;
      }
    }
    if (node_[1] != kUndecided) {
      const int champion = node_[1];
      ranked_.push_back(champion);
      if (static_cast<int>(ranked_.size()) == n_) {
        ++sorts_completed_;
        node_.clear(); // next refill reseeds a fresh random bracket
        return;
      }
      node_[leaf_of_[champion]] = kEmptySlot;
      for (int v = leaf_of_[champion] / 2; v >= 1; v /= 2)
        node_[v] = kUndecided;
      changed = true;
    }
  }
}

std::vector<Pair> TreeSelectSampler::refill(RngStream& rng) {
  for (;;) {
    if (node_.empty())
      seed_tree(rng);
    propagate_and_extract();
    if (node_.empty())
      continue;

    std::vector<Pair> matches;
    match_nodes_.clear();
    for (int v = leaf_base_ - 1; v >= 1; --v) {
      if (node_[v] != kUndecided)
        continue;
      const int a = node_[2 * v];
      const int b = node_[2 * v + 1];
      if (a >= 0 && b >= 0) {
        const Pair p = make_pair(a, b);
        matches.push_back(p);
        match_nodes_[p] = v;
      }
    }
    if (!matches.empty()) {
      std::sort(matches.begin(), matches.end());
      return matches;
    }
  }
}

void TreeSelectSampler::on_outcome(const ComparisonOutcome& outcome) {
  const auto it = match_nodes_.find(outcome.pair);
  if (it == match_nodes_.end())
    throw ProtocolViolationError("tree-select: outcome for an unissued match");
  node_[it->second] = outcome.winner;
  match_nodes_.erase(it);
}

// ---------------------------------------------------------------------------
// Sort-MST

std::map<Pair, double> elo_rank_weights(const EloRatings& ratings) {
  const int n = static_cast<int>(ratings.size());
  if (n < 2)
    throw std::invalid_argument("elo_rank_weights: need n >= 2");
  std::vector<std::pair<double, Pair>> diffs;
  diffs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      diffs.emplace_back(std::abs(ratings[i] - ratings[j]), Pair{i, j});
  std::sort(diffs.begin(), diffs.end());

  std::map<Pair, double> weights;
  for (std::size_t rank = 0; rank < diffs.size(); ++rank)
    weights[diffs[rank].second] = static_cast<double>(rank + 1);
  return weights;
}

SortMstSampler::SortMstSampler(int n)
    : Sampler(SamplerKind::kSortMst, n), elo_(n, kEloInitialRating) {}

std::vector<Pair> SortMstSampler::refill(RngStream&) {
  // rank pairs by Elo difference, smallest first; the rank itself is the
  // edge weight, so the spanning tree prefers similar pairs
  return minimum_spanning_tree(n_, elo_rank_weights(elo_));
}

void SortMstSampler::on_outcome(const ComparisonOutcome& outcome) {
  elo_ = elo_update(elo_, outcome.pair.i, outcome.pair.j, outcome.winner);
}

// ---------------------------------------------------------------------------
// Hybrid-MST

HybridMstSampler::HybridMstSampler(int n, double prior_strength)
    : Sampler(SamplerKind::kHybridMst, n), prior_strength_(prior_strength),
      wins_(n) {
  if (prior_strength <= 0.0)
    throw std::invalid_argument(
        "hybrid-mst: needs a positive prior for posterior refits");
}

std::vector<Pair> HybridMstSampler::refill(RngStream&) {
  ScoreVector mean = fit_bt(wins_, prior_strength_);
  std::vector<double> variance =
      bt_laplace_variances(mean, wins_, prior_strength_);
  posterior_ = PosteriorApprox{std::move(mean), std::move(variance)};

  std::map<Pair, double> weights;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      weights[Pair{i, j}] = -expected_information_gain(posterior_, i, j);
  return minimum_spanning_tree(n_, weights);
}

void HybridMstSampler::on_outcome(const ComparisonOutcome& outcome) {
  const int loser =
      outcome.pair.i == outcome.winner ? outcome.pair.j : outcome.pair.i;
  wins_.add_win(outcome.winner, loser);
}

} // namespace pairbench
