#ifndef PAIRBENCH_SAMPLERS_HPP
#define PAIRBENCH_SAMPLERS_HPP

#include <compare>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pairbench/model.hpp"
#include "pairbench/rng.hpp"

namespace pairbench {

/// Unordered stimulus pair, stored canonically with i < j.
struct Pair {
  int i = 0;
  int j = 0;
  auto operator<=>(const Pair&) const = default;
};

/// Canonicalizes and validates a pair of distinct stimulus ids.
Pair make_pair(int a, int b);

struct ComparisonOutcome {
  Pair pair;
  int winner = 0; // must be pair.i or pair.j
};

enum class SamplerKind {
  kRandom,
  kKnockout,
  kSwiss,
  kTreeSelect,
  kSortMst,
  kHybridMst,
};

inline constexpr SamplerKind kAllSamplerKinds[] = {
    SamplerKind::kRandom,    SamplerKind::kKnockout, SamplerKind::kSwiss,
    SamplerKind::kTreeSelect, SamplerKind::kSortMst, SamplerKind::kHybridMst,
};

const char* to_string(SamplerKind kind);
std::optional<SamplerKind> sampler_kind_from_string(std::string_view name);

/// Gaussian approximation of the score posterior: per-stimulus means and
/// variances.
struct PosteriorApprox {
  ScoreVector mean;
  std::vector<double> variance;
};

/// Minimum spanning tree of the complete graph on n nodes. `weights` must
/// contain every canonical pair. Ties are broken by canonical edge order,
/// so the result is deterministic. Returns the n-1 edges sorted.
std::vector<Pair> minimum_spanning_tree(int n,
                                        const std::map<Pair, double>& weights);

/// Expected KL divergence between the score posterior before and after a
/// comparison of i and j, averaged over the two possible outcomes. The pair
/// difference d = s_i - s_j is treated as Gaussian with mean mu_i - mu_j and
/// variance var_i + var_j; the outcome model is Bradley-Terry on d. Evaluated
/// with 16-point Gauss-Hermite quadrature. Symmetric in (i, j), >= 0.
double expected_information_gain(const PosteriorApprox& posterior, int i,
                                 int j);

/// Sort-MST edge weights: pairs ranked by |Elo difference| ascending (ties
/// broken canonically); the weight of a pair is its 1-based rank.
std::map<Pair, double> elo_rank_weights(const EloRatings& ratings);

struct SamplerOptions {
  double prior_strength = 0.1; // BT prior for the hybrid-mst posterior refits
};

/// Common interface of the six comparison-scheduling procedures. A sampler
/// is single-session mutable state; serialize access externally. Distinct
/// samplers are independent.
class Sampler {
public:
  virtual ~Sampler() = default;

  SamplerKind kind() const { return kind_; }
  int stimulus_count() const { return n_; }

  /// Dequeues the next scheduled pair, refilling the pending batch from the
  /// kind-specific generator when it runs empty.
  Pair next_pair(RngStream& rng);

  /// Records a judged outcome and advances the scheduling state.
  void record_outcome(const ComparisonOutcome& outcome);

  const std::vector<ComparisonOutcome>& history() const { return history_; }
  const std::deque<Pair>& pending() const { return pending_; }
  /// The most recent batch produced by the kind-specific generator.
  const std::vector<Pair>& last_batch() const { return last_batch_; }

protected:
  Sampler(SamplerKind kind, int n);

  virtual std::vector<Pair> refill(RngStream& rng) = 0;
  virtual void on_outcome(const ComparisonOutcome& outcome) = 0;

  bool batch_fully_recorded() const {
    return pending_.empty() && outstanding_.empty();
  }

  SamplerKind kind_;
  int n_;
  std::vector<ComparisonOutcome> history_;
  std::deque<Pair> pending_;
  std::deque<Pair> outstanding_; // issued, not yet recorded (non-random kinds)
  std::vector<Pair> last_batch_;
};

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, int n,
                                      SamplerOptions options = {});

/// Uniformly random pairs; the minimum-performance baseline.
class RandomSampler final : public Sampler {
public:
  explicit RandomSampler(int n);

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;
};

/// Single-elimination knockout brackets, randomly seeded, replayed until the
/// comparison budget is exhausted. Non-power-of-two sizes get byes in
/// randomly chosen round-1 slots; one bracket costs exactly n-1 comparisons.
class KnockoutSampler final : public Sampler {
public:
  explicit KnockoutSampler(int n);

  int brackets_completed() const { return brackets_completed_; }

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;

private:
  void seed_bracket(RngStream& rng);

  std::vector<int> round_;              // current round slots; -1 = bye
  std::vector<int> next_round_;         // winners, filled as outcomes arrive
  std::map<Pair, int> match_slots_;     // issued pair -> slot in next_round_
  int brackets_completed_ = 0;
};

/// Swiss tournament: sort by (wins, opponent match win percentage, random
/// tiebreak), pair adjacent standings without repeats, restart after
/// floor(log2 n) + 2 rounds.
class SwissSampler final : public Sampler {
public:
  explicit SwissSampler(int n);

  int rounds_completed() const { return rounds_completed_; }
  int tournaments_completed() const { return tournaments_completed_; }
  int rounds_per_tournament() const { return rounds_per_tournament_; }
  /// Pairs already issued in the current tournament.
  const std::set<Pair>& played_this_tournament() const { return played_; }
  const std::vector<int>& wins() const { return wins_; }
  const std::vector<int>& games() const { return games_; }
  const std::vector<std::vector<int>>& opponents() const { return opponents_; }
  /// Repeat pairings the matcher was forced to accept because no
  /// repeat-free perfect matching existed (tiny n, or an exhausted pairing
  /// space late in a tournament). Cumulative over the sampler's life.
  long forced_repeats() const { return forced_repeats_; }

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;

private:
  double opponent_match_win_rate(int id) const;
  void reset_tournament();

  int rounds_per_tournament_;
  int rounds_completed_ = 0;
  int tournaments_completed_ = 0;
  long forced_repeats_ = 0;
  std::vector<int> wins_;
  std::vector<int> games_;
  std::vector<std::vector<int>> opponents_;
  std::vector<char> had_bye_;
  std::set<Pair> played_;
};

/// Selection-tree full sort: play a random bracket once, then repeatedly
/// remove the champion and replay only the matches along its root-to-leaf
/// path to rank the remaining stimuli; reseed when everything is ranked.
class TreeSelectSampler final : public Sampler {
public:
  explicit TreeSelectSampler(int n);

  const std::vector<int>& ranked() const { return ranked_; }
  int sorts_completed() const { return sorts_completed_; }

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;

private:
  void seed_tree(RngStream& rng);
  void propagate_and_extract();

  // heap-indexed tree; nodes 1..2m-1, leaves m..2m-1; values are stimulus
  // ids, kEmpty, or kUndecided
  std::vector<int> node_;
  int leaf_base_ = 0;
  std::vector<int> leaf_of_;            // stimulus id -> leaf index
  std::map<Pair, int> match_nodes_;     // issued pair -> tree node
  std::vector<int> ranked_;
  int sorts_completed_ = 0;
};

/// Sort-MST: rank all pairs by Elo-score difference (smallest first) and
/// emit the minimum spanning tree of the rank-weighted complete graph as
/// each batch, so similar pairs are preferred without oversampling any edge.
class SortMstSampler final : public Sampler {
public:
  explicit SortMstSampler(int n);

  const EloRatings& elo() const { return elo_; }

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;

private:
  EloRatings elo_;
};

/// Hybrid-MST: refit the Bradley-Terry posterior each batch (Laplace
/// approximation) and emit the spanning tree maximizing total expected
/// information gain.
class HybridMstSampler final : public Sampler {
public:
  HybridMstSampler(int n, double prior_strength);

  const PosteriorApprox& posterior() const { return posterior_; }

protected:
  std::vector<Pair> refill(RngStream& rng) override;
  void on_outcome(const ComparisonOutcome& outcome) override;

private:
  double prior_strength_;
  WinMatrix wins_;
  PosteriorApprox posterior_;
};

} // namespace pairbench

#endif // PAIRBENCH_SAMPLERS_HPP
