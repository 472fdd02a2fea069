// pairbench command-line interface:
//   simulate   run a Monte Carlo benchmark from a config file / flags
//   plot-data  reslice a results CSV into per-figure long-format tables
//   fit        fit Bradley-Terry scores to a user-supplied comparison CSV
//   oracle     run the brute-force BT / MST reference implementations

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../tests/oracles.hpp"
#include "pairbench/harness.hpp"

namespace {

using namespace pairbench;

std::vector<SamplerKind> parse_sampler_list(const std::string& csv) {
  std::vector<SamplerKind> kinds;
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto kind = sampler_kind_from_string(name);
    if (!kind)
      throw CLI::ValidationError("--samplers", "unknown sampler: " + name);
    kinds.push_back(*kind);
  }
  if (kinds.empty())
    throw CLI::ValidationError("--samplers", "empty sampler list");
  return kinds;
}

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int run_simulate(const std::string& config_file, std::optional<int> n,
                 std::optional<double> sigma_max, std::optional<double> epsilon,
                 std::optional<std::string> samplers,
                 std::optional<int> trials, std::optional<int> repeats,
                 std::optional<std::uint64_t> seed,
                 std::optional<double> prior_strength, std::optional<int> jobs,
                 std::optional<std::string> out) {
  ExperimentConfig config =
      config_file.empty() ? ExperimentConfig{} : load_config_file(config_file);
  if (n)
    config.n = *n;
  if (sigma_max)
    config.sigma_max = *sigma_max;
  if (epsilon)
    config.epsilon = *epsilon;
  if (samplers)
    config.samplers = parse_sampler_list(*samplers);
  if (trials)
    config.trials = *trials;
  if (repeats)
    config.repeats = *repeats;
  if (seed)
    config.seed = *seed;
  if (prior_strength)
    config.prior_strength = *prior_strength;
  if (jobs)
    config.jobs = *jobs;
  if (out)
    config.output_path = *out;
  validate_config(config);

  const auto series = run_experiment(config);
  export_results(series, config.output_path);

  std::size_t points = 0;
  for (const auto& s : series)
    points += s.points.size();
  std::cout << "wrote " << config.output_path << ": " << series.size()
            << " samplers x " << (series.empty() ? 0 : series[0].points.size())
            << " checkpoints (" << 3 * points << " rows)\n";
  return 0;
}

int run_plot_data(const std::string& in, const std::string& metric,
                  const std::string& out) {
  const auto rows = import_results(in);
  std::ostringstream table;
  table << "sampler,n,comparisons,standard_trials,mean,ci_lo,ci_hi\n";
  std::size_t written = 0;
  for (const auto& row : rows) {
    if (row.metric != metric)
      continue;
    const double pairs_per_trial =
        static_cast<double>(row.n) * (row.n - 1) / 2.0;
    table << row.sampler << ',' << row.n << ',' << row.comparisons << ','
          << g6(static_cast<double>(row.comparisons) / pairs_per_trial) << ','
          << (row.mean ? g6(*row.mean) : "") << ','
          << (row.ci_lo ? g6(*row.ci_lo) : "") << ','
          << (row.ci_hi ? g6(*row.ci_hi) : "") << "\n";
    ++written;
  }
  if (written == 0) {
    std::cerr << "no rows with metric '" << metric << "' in " << in << "\n";
    return 1;
  }
  if (out.empty() || out == "-") {
    std::cout << table.str();
  } else {
    std::ofstream f(out);
    if (!f)
      throw std::runtime_error("cannot open " + out);
    f << table.str();
    std::cout << "wrote " << out << " (" << written << " rows)\n";
  }
  return 0;
}

int run_fit(const std::string& in, int n, double prior_strength) {
  const WinMatrix wins = read_comparisons_csv(in, n);
  const ScoreVector scores = fit_bt(wins, prior_strength);
  std::cout << "stimulus,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", scores[i]);
    std::cout << i << ',' << buf << "\n";
  }
  return 0;
}

int run_oracle_bt(const std::string& in, int n, double prior_strength) {
  const WinMatrix wins = read_comparisons_csv(in, n);
  if (wins.size() > 3) {
    std::cerr << "the brute-force BT oracle supports n <= 3 (got n="
              << wins.size() << ")\n";
    return 1;
  }
  const ScoreVector scores = oracles::bt_fit_oracle(wins, prior_strength);
  std::cout << "stimulus,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", scores[i]);
    std::cout << i << ',' << buf << "\n";
  }
  return 0;
}

int run_oracle_mst(const std::string& in) {
  std::ifstream f(in);
  if (!f)
    throw std::runtime_error("cannot open " + in);
  std::string line;
  if (!std::getline(f, line) || line.rfind("i,j,weight", 0) != 0)
    throw std::runtime_error(in + ": expected header i,j,weight");
  std::map<Pair, double> weights;
  int n = 0;
  while (std::getline(f, line)) {
    if (line.empty())
      continue;
    int i, j;
    double w;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &i, &j, &w) != 3)
      throw std::runtime_error(in + ": malformed edge row: " + line);
    weights[make_pair(i, j)] = w;
    n = std::max({n, i + 1, j + 1});
  }
  if (n < 2 || static_cast<int>(weights.size()) != n * (n - 1) / 2)
    throw std::runtime_error(in + ": need a weight for every pair of 0.." +
                             std::to_string(n - 1));
  if (n > 8) {
    std::cerr << "the exhaustive MST oracle supports n <= 8 (got n=" << n
              << ")\n";
    return 1;
  }
  const double total = oracles::mst_total_weight_oracle(n, weights);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", total);
  std::cout << "minimum spanning tree total weight: " << buf << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairbench: pairwise-comparison sampling benchmark"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  std::string config_file;
  std::optional<int> n, trials, repeats, jobs;
  std::optional<double> sigma_max, epsilon, prior_strength;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> samplers, out;
  sim->add_option("--config", config_file, "key=value config file");
  sim->add_option("--n", n, "stimulus count");
  sim->add_option("--sigma-max", sigma_max, "observer noise upper bound");
  sim->add_option("--epsilon", epsilon, "judgment-error probability");
  sim->add_option("--samplers", samplers,
                  "comma list: random,knockout,swiss,tree-select,sort-mst,"
                  "hybrid-mst");
  sim->add_option("--trials", trials, "standard trials (n(n-1)/2 comparisons each)");
  sim->add_option("--repeats", repeats, "Monte Carlo repeats");
  sim->add_option("--seed", seed, "root seed");
  sim->add_option("--prior-strength", prior_strength,
                  "virtual wins per ordered pair in BT fits");
  sim->add_option("--jobs", jobs, "worker threads (0 = all cores)")
      ->envname("PAIRBENCH_JOBS");
  sim->add_option("--out", out, "output CSV path");

  // plot-data
  auto* plot = app.add_subcommand(
      "plot-data", "reslice a results CSV into one metric-vs-comparisons table");
  std::string plot_in, plot_metric, plot_out;
  plot->add_option("--in", plot_in, "results CSV from simulate")->required();
  plot->add_option("--metric", plot_metric, "pcc, rocc or rmse")
      ->required()
      ->check(CLI::IsMember({"pcc", "rocc", "rmse"}));
  plot->add_option("--out", plot_out, "output path (default: stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit BT scores from a comparison CSV");
  std::string fit_in;
  int fit_n = 0;
  double fit_prior = 0.1;
  fit->add_option("--in", fit_in, "CSV with header i,j,winner")->required();
  fit->add_option("--n", fit_n, "stimulus count (default: max id + 1)");
  fit->add_option("--prior-strength", fit_prior,
                  "virtual wins per ordered pair");

  // oracle
  auto* oracle =
      app.add_subcommand("oracle", "run the brute-force reference oracles");
  oracle->require_subcommand(1);
  auto* oracle_bt = oracle->add_subcommand(
      "bt", "grid/golden-section BT likelihood maximizer (n <= 3)");
  std::string oracle_bt_in;
  int oracle_bt_n = 0;
  double oracle_bt_prior = 0.0;
  oracle_bt->add_option("--in", oracle_bt_in, "CSV with header i,j,winner")
      ->required();
  oracle_bt->add_option("--n", oracle_bt_n, "stimulus count");
  oracle_bt->add_option("--prior-strength", oracle_bt_prior,
                        "virtual wins per ordered pair");
  auto* oracle_mst = oracle->add_subcommand(
      "mst", "exhaustive spanning-tree enumeration (n <= 8)");
  std::string oracle_mst_in;
  oracle_mst->add_option("--in", oracle_mst_in, "CSV with header i,j,weight")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_simulate(config_file, n, sigma_max, epsilon, samplers, trials,
                          repeats, seed, prior_strength, jobs, out);
    if (plot->parsed())
      return run_plot_data(plot_in, plot_metric, plot_out);
    if (fit->parsed())
      return run_fit(fit_in, fit_n, fit_prior);
    if (oracle_bt->parsed())
      return run_oracle_bt(oracle_bt_in, oracle_bt_n, oracle_bt_prior);
    if (oracle_mst->parsed())
      return run_oracle_mst(oracle_mst_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
