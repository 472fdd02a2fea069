// Acceptance suite: one test case per criterion, each printing a
// [PASS]/[FAIL] line. Run via ctest (test name "acceptance") or directly:
//   ./build/tests/test_acceptance
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pairbench/harness.hpp"

using namespace pairbench;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void report(int criterion, bool ok, const std::string& what) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion,
              what.c_str());
  std::fflush(stdout);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

int hardware_jobs() { return 2; }

// Criterion 5/6/9 share one experiment: n=16, sigma_max 0.7, epsilon 0.1,
// 100 repeats, all six samplers.
const std::vector<MetricSeries>& ranking_experiment() {
  static const std::vector<MetricSeries> series = [] {
    ExperimentConfig config;
    config.n = 16;
    config.sigma_max = 0.7;
    config.epsilon = 0.1;
    config.trials = 15;
    config.repeats = 100;
    config.seed = 20250'801;
    config.jobs = hardware_jobs();
    return run_experiment(config);
  }();
  return series;
}

const MetricSeries& series_for(const std::vector<MetricSeries>& all,
                               SamplerKind kind) {
  for (const auto& s : all)
    if (s.kind == kind)
      return s;
  throw std::logic_error("sampler missing from experiment");
}

} // namespace

TEST_CASE("criterion 1: fit_bt matches brute-force likelihood maximization") {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(11001);
  int tested = 0;
  double worst = 0.0;
  while (tested < 200) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 1));
    WinMatrix wins(n);
    const int comparisons = 1 + static_cast<int>(rng.uniform_int(0, 9));
    for (int c = 0; c < comparisons; ++c) {
      const int i = static_cast<int>(rng.uniform_int(0, n - 1));
      int j = static_cast<int>(rng.uniform_int(0, n - 2));
      if (j >= i)
        ++j;
      wins.add_win(i, j);
    }
    if (!oracles::bt_identifiable(wins))
      continue;
    ++tested;
    const ScoreVector got = fit_bt(wins, 0.0);
    const ScoreVector want = oracles::bt_fit_oracle(wins, 0.0);
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst < 1e-3 && elapsed < 10.0;
  CHECK(worst < 1e-3);
  CHECK(elapsed < 10.0);
  std::ostringstream what;
  what << "BT fit vs oracle on 200 instances, worst |ds| = " << worst << " ("
       << elapsed << " s)";
  report(1, ok, what.str());
}

TEST_CASE("criterion 2: minimum_spanning_tree matches exhaustive enumeration") {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(11002);
  bool all_equal = true;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 3));
    std::map<Pair, double> weights;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        weights[{i, j}] = rng.uniform(0.0, 100.0);
    const auto tree = minimum_spanning_tree(n, weights);
    const double got = oracles::edge_set_weight(tree, weights);
    const double want = oracles::mst_total_weight_oracle(n, weights);
    if (got != want)
      all_equal = false;
    CHECK(got == want);
  }
  const double elapsed = seconds_since(start);
  CHECK(elapsed < 5.0);
  report(2, all_equal && elapsed < 5.0,
         "MST total weight equals enumeration on 100 graphs (" +
             std::to_string(elapsed) + " s)");
}

TEST_CASE("criterion 3: simulated win rates follow the probit law") {
  const auto start = std::chrono::steady_clock::now();
  RngStream setup(11003);
  bool all_within = true;
  for (int t = 0; t < 20; ++t) {
    GroundTruth gt;
    gt.scores = {setup.uniform(0.0, 5.0), setup.uniform(0.0, 5.0)};
    gt.sigmas = {setup.uniform(0.02, 1.0), setup.uniform(0.02, 1.0)};
    gt.epsilon = setup.uniform(0.0, 0.4);
    const double phi = thurstone_win_probability(gt.scores[0], gt.scores[1],
                                                 gt.sigmas[0], gt.sigmas[1]);
    const double expected = (1.0 - gt.epsilon) * phi + gt.epsilon * (1.0 - phi);
    RngStream rng(42000 + t);
    const int draws = 50000;
    int wins = 0;
    for (int d = 0; d < draws; ++d)
      wins += simulate_comparison(gt, 0, 1, rng).winner == 0;
    const double se =
        std::sqrt(draws * std::max(expected * (1.0 - expected), 1e-12));
    const double dev = std::abs(wins - draws * expected);
    if (dev >= 4.0 * se)
      all_within = false;
    CHECK(dev < 4.0 * se);
  }
  const double elapsed = seconds_since(start);
  CHECK(elapsed < 30.0);
  report(3, all_within && elapsed < 30.0,
         "empirical win rates within 4 SE of (1-eps)*Phi + eps*(1-Phi) (" +
             std::to_string(elapsed) + " s)");
}

TEST_CASE("criterion 4: BT gradient matches central finite differences") {
  RngStream rng(11004);
  double worst_rel = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 10));
    WinMatrix wins(n);
    for (int c = 0; c < 5 * n; ++c) {
      const int i = static_cast<int>(rng.uniform_int(0, n - 1));
      int j = static_cast<int>(rng.uniform_int(0, n - 2));
      if (j >= i)
        ++j;
      wins.add_win(i, j);
    }
    ScoreVector s(n);
    for (double& v : s)
      v = rng.uniform(-2.0, 2.0);
    const double prior = rng.uniform(0.0, 1.0);
    const ScoreVector grad = bt_log_likelihood_gradient(s, wins, prior);
    const double h = 1e-5;
    for (int i = 0; i < n; ++i) {
      ScoreVector up = s, down = s;
      up[i] += h;
      down[i] -= h;
      const double fd = (bt_log_likelihood(up, wins, prior) -
                         bt_log_likelihood(down, wins, prior)) /
                        (2.0 * h);
      const double rel =
          std::abs(grad[i] - fd) / std::max({std::abs(fd), std::abs(grad[i]), 1.0});
      worst_rel = std::max(worst_rel, rel);
    }
  }
  CHECK(worst_rel < 1e-6);
  std::ostringstream what;
  what << "gradient vs central differences, worst relative error = "
       << worst_rel;
  report(4, worst_rel < 1e-6, what.str());
}

TEST_CASE("criterion 5: Sort-MST achieves the highest ranking accuracy") {
  const auto start = std::chrono::steady_clock::now();
  const auto& all = ranking_experiment();
  const double elapsed = seconds_since(start);

  const auto& sort_mst = series_for(all, SamplerKind::kSortMst);
  const auto& random = series_for(all, SamplerKind::kRandom);
  const std::int64_t two_trials = 2 * 16 * 15 / 2; // 240 comparisons

  bool dominates_random = true;
  for (std::size_t k = 0; k < sort_mst.points.size(); ++k) {
    if (sort_mst.points[k].comparisons < two_trials)
      continue;
    REQUIRE(sort_mst.points[k].rocc.mean.has_value());
    REQUIRE(random.points[k].rocc.mean.has_value());
    if (*sort_mst.points[k].rocc.mean < *random.points[k].rocc.mean)
      dominates_random = false;
  }
  CHECK(dominates_random);

  const double sort_final = *sort_mst.points.back().rocc.mean;
  bool best_at_final = true;
  for (const auto& s : all) {
    if (s.kind == SamplerKind::kSortMst)
      continue;
    const double other = *s.points.back().rocc.mean;
    if (sort_final < other - 0.02)
      best_at_final = false;
    CHECK(sort_final >= other - 0.02);
  }
  std::ostringstream what;
  what << "Sort-MST ROCC >= random at every checkpoint from 2 trials and >= "
          "all others - 0.02 at the final (final ROCC = "
       << sort_final << ", " << elapsed << " s)";
  report(5, dominates_random && best_at_final, what.str());
}

TEST_CASE("criterion 6: repeated knockouts do not beat random sampling") {
  const auto& all = ranking_experiment();
  const double ko = *series_for(all, SamplerKind::kKnockout).points.back().rocc.mean;
  const double random =
      *series_for(all, SamplerKind::kRandom).points.back().rocc.mean;
  const bool ok = ko <= random + 0.02;
  CHECK(ok);
  std::ostringstream what;
  what << "knockout final ROCC " << ko << " <= random " << random << " + 0.02";
  report(6, ok, what.str());
}

TEST_CASE("criterion 7: Hybrid-MST is at least as robust as random") {
  ExperimentConfig config;
  config.n = 8;
  config.sigma_max = 0.7;
  config.epsilon = 0.1;
  config.trials = 15;
  config.repeats = 100;
  config.seed = 20250'807;
  config.jobs = hardware_jobs();
  config.samplers = {SamplerKind::kRandom, SamplerKind::kHybridMst};
  const auto all = run_experiment(config);

  const auto& hybrid = series_for(all, SamplerKind::kHybridMst);
  const auto& random = series_for(all, SamplerKind::kRandom);
  const double h_rmse = *hybrid.points.back().rmse.mean;
  const double r_rmse = *random.points.back().rmse.mean;
  const double h_pcc = *hybrid.points.back().pcc.mean;
  const double r_pcc = *random.points.back().pcc.mean;
  const bool ok = h_rmse <= r_rmse && h_pcc >= r_pcc;
  CHECK(h_rmse <= r_rmse);
  CHECK(h_pcc >= r_pcc);
  std::ostringstream what;
  what << "hybrid-mst final RMSE " << h_rmse << " <= random " << r_rmse
       << "; final PCC " << h_pcc << " >= random " << r_pcc;
  report(7, ok, what.str());
}

TEST_CASE("criterion 8: sorting stays competitive under high noise") {
  ExperimentConfig config;
  config.n = 16;
  config.sigma_max = 1.0;
  config.epsilon = 0.3;
  config.trials = 15;
  config.repeats = 100;
  config.seed = 20250'808;
  config.jobs = hardware_jobs();
  config.samplers = {SamplerKind::kSwiss, SamplerKind::kSortMst,
                     SamplerKind::kHybridMst};
  const auto all = run_experiment(config);

  // the comparison itself is part of the deliverable: emit it with CIs
  const std::string path = temp_path("pairbench_high_noise.csv");
  export_results(all, path);
  const bool emitted = std::filesystem::exists(path);
  CHECK(emitted);

  const auto& sort_mst = series_for(all, SamplerKind::kSortMst);
  const auto& hybrid = series_for(all, SamplerKind::kHybridMst);
  const auto& swiss = series_for(all, SamplerKind::kSwiss);
  const double sort_pcc = *sort_mst.points.back().pcc.mean;
  const double hybrid_pcc = *hybrid.points.back().pcc.mean;
  const bool ok = emitted && sort_pcc >= hybrid_pcc - 0.05;
  CHECK(sort_pcc >= hybrid_pcc - 0.05);
  std::ostringstream what;
  what << "high-noise final PCC: sort-mst " << sort_pcc << ", swiss "
       << *swiss.points.back().pcc.mean << ", hybrid-mst " << hybrid_pcc
       << " (non-inferiority margin 0.05; table at " << path << ")";
  report(8, ok, what.str());
  std::filesystem::remove(path);
}

TEST_CASE("criterion 9: job count never changes a byte of output") {
  ExperimentConfig config;
  config.n = 16;
  config.sigma_max = 0.7;
  config.epsilon = 0.1;
  config.trials = 15;
  config.repeats = 100;
  config.seed = 20250'801; // same experiment as criterion 5
  const std::string path_a = temp_path("pairbench_jobs2.csv");
  const std::string path_b = temp_path("pairbench_jobs1.csv");

  export_results(ranking_experiment(), path_a); // computed with jobs = 2
  config.jobs = 1;
  export_results(run_experiment(config), path_b);

  std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  const bool identical = sa.str() == sb.str() && !sa.str().empty();
  CHECK(identical);
  report(9, identical, "CSVs from --jobs 2 and --jobs 1 are byte-identical");
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST_CASE("criterion 10: near-noiseless runs recover the exact ranking") {
  ExperimentConfig config;
  config.n = 8;
  config.sigma_max = 0.01;
  config.epsilon = 0.0;
  config.trials = 15;
  config.repeats = 100;
  config.seed = 20250'810;
  int perfect = 0;
  for (int r = 0; r < config.repeats; ++r) {
    const auto points = run_repeat(config, SamplerKind::kRandom, r);
    if (points.back().rocc && *points.back().rocc == 1.0)
      ++perfect;
  }
  const bool ok = perfect >= 95;
  CHECK(perfect >= 95);
  report(10, ok,
         "final ROCC = 1.0 in " + std::to_string(perfect) + "/100 repeats");
}

TEST_CASE("criterion 11: module invariants hold for n = 2..32") {
  bool all_ok = true;

  // probability complement / monotonicity spot sweep
  RngStream prng(11011);
  for (int t = 0; t < 500; ++t) {
    const double a = prng.uniform(-30.0, 30.0);
    const double b = prng.uniform(-30.0, 30.0);
    if (std::abs(bt_win_probability(a, b) + bt_win_probability(b, a) - 1.0) >
        1e-12)
      all_ok = false;
  }
  CHECK(all_ok);

  RngStream outcome_rng(11012);
  for (int n = 2; n <= 32; ++n) {
    const auto sched = checkpoint_schedule(n, 15);
    const std::int64_t full_budget = 15LL * n * (n - 1) / 2;
    if (sched.budget != full_budget)
      all_ok = false;
    CHECK(sched.budget == full_budget);
    for (std::size_t k = 0; k < sched.checkpoints.size(); ++k) {
      if (sched.checkpoints[k] !=
          static_cast<std::int64_t>(k + 1) * sched.interval)
        all_ok = false;
    }

    // budget for the structural sweep: full spec budget for small n, two
    // standard trials for the larger sizes to keep the suite quick
    const std::int64_t budget =
        n <= 12 ? full_budget : 2LL * n * (n - 1) / 2;

    for (SamplerKind kind : kAllSamplerKinds) {
      auto sampler = make_sampler(kind, n);
      auto* swiss = dynamic_cast<SwissSampler*>(sampler.get());
      RngStream pair_rng(100 * n + static_cast<int>(kind));
      EloRatings elo(n, kEloInitialRating);
      std::set<Pair> swiss_issued;
      int swiss_tournament = 0;
      long swiss_forced_start = 0;
      long swiss_repeats_issued = 0;

      for (std::int64_t c = 0; c < budget; ++c) {
        const Pair p = sampler->next_pair(pair_rng);
        if (p.i < 0 || p.i >= p.j || p.j >= n)
          all_ok = false;

        // structural batch checks at batch boundaries
        if (sampler->pending().size() + 1 == sampler->last_batch().size() ||
            sampler->last_batch().size() == 1) {
          const auto& batch = sampler->last_batch();
          if (kind == SamplerKind::kSortMst || kind == SamplerKind::kHybridMst) {
            if (static_cast<int>(batch.size()) != n - 1)
              all_ok = false;
            std::vector<int> parent(n);
            std::iota(parent.begin(), parent.end(), 0);
            const auto find = [&](int x) {
              while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
              return x;
            };
            for (const Pair& e : batch) {
              const int ra = find(e.i), rb = find(e.j);
              if (ra == rb)
                all_ok = false;
              parent[ra] = rb;
            }
          } else if (kind == SamplerKind::kSwiss) {
            if (static_cast<int>(batch.size()) != n / 2)
              all_ok = false;
            std::set<int> seen;
            for (const Pair& e : batch) {
              if (!seen.insert(e.i).second || !seen.insert(e.j).second)
                all_ok = false;
            }
          }
        }

        if (kind == SamplerKind::kSwiss) {
          if (swiss->tournaments_completed() != swiss_tournament) {
            // issued repeats must all have been proven forced by the matcher
            if (swiss_repeats_issued !=
                swiss->forced_repeats() - swiss_forced_start)
              all_ok = false;
            swiss_tournament = swiss->tournaments_completed();
            swiss_issued.clear();
            swiss_repeats_issued = 0;
            swiss_forced_start = swiss->forced_repeats();
          }
          if (!swiss_issued.insert(p).second)
            ++swiss_repeats_issued;
        }

        const int winner = outcome_rng.bernoulli(0.5) ? p.i : p.j;
        sampler->record_outcome({p, winner});
        if (kind == SamplerKind::kSortMst)
          elo = elo_update(elo, p.i, p.j, winner);
      }

      if (sampler->history().size() != static_cast<std::size_t>(budget))
        all_ok = false;

      if (kind == SamplerKind::kSwiss) {
        if (swiss->rounds_per_tournament() !=
            static_cast<int>(std::floor(std::log2(n))) + 2)
          all_ok = false;
        // strict no-repeat whenever the pairing space is roomy
        if (n >= 12 && swiss->forced_repeats() != 0)
          all_ok = false;
      }
      if (kind == SamplerKind::kSortMst) {
        const double sum = std::accumulate(elo.begin(), elo.end(), 0.0);
        if (std::abs(sum - n * kEloInitialRating) > 1e-9)
          all_ok = false;
        const auto* sm = dynamic_cast<SortMstSampler*>(sampler.get());
        for (int i = 0; i < n; ++i)
          if (std::abs(sm->elo()[i] - elo[i]) > 1e-12)
            all_ok = false;
      }
    }

    // EIG symmetry and non-negativity at this n
    RngStream eig_rng(200 + n);
    PosteriorApprox post;
    post.mean.resize(n);
    post.variance.resize(n);
    for (int i = 0; i < n; ++i) {
      post.mean[i] = eig_rng.uniform(-3.0, 3.0);
      post.variance[i] = eig_rng.uniform(0.01, 2.0);
    }
    for (int t = 0; t < 10; ++t) {
      const int i = static_cast<int>(eig_rng.uniform_int(0, n - 1));
      int j = static_cast<int>(eig_rng.uniform_int(0, n - 2));
      if (j >= i)
        ++j;
      const double eij = expected_information_gain(post, i, j);
      if (eij != expected_information_gain(post, j, i) || eij < 0.0)
        all_ok = false;
    }
  }
  CHECK(all_ok);
  report(11, all_ok,
         "pair validity, batch structure, Swiss rounds/no-repeat, Elo "
         "zero-sum, EIG symmetry, budget/checkpoint exactness for n = 2..32");
}
