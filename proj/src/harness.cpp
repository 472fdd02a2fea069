#include "pairbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pairbench/errors.hpp"

namespace pairbench {

namespace {

// substream tags for RngStream::derive
constexpr std::uint64_t kTagGroundTruth = 0x6774;
constexpr std::uint64_t kTagObserver = 0x6f62;
constexpr std::uint64_t kTagSampler = 0x736d;
constexpr std::uint64_t kTagBootstrap = 0x6273;

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_opt(const std::optional<double>& v) {
  return v ? format_g6(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.n < 2)
    throw std::invalid_argument("config: n must be >= 2");
  if (!(config.sigma_max > 0.0))
    throw std::invalid_argument("config: sigma_max must be > 0");
  if (config.epsilon < 0.0 || config.epsilon > 0.5)
    throw std::invalid_argument("config: epsilon must be in [0, 0.5]");
  if (config.trials < 0)
    throw std::invalid_argument("config: trials must be >= 0");
  if (config.repeats < 1)
    throw std::invalid_argument("config: repeats must be >= 1");
  if (config.samplers.empty())
    throw std::invalid_argument("config: no samplers selected");
  if (config.prior_strength < 0.0)
    throw std::invalid_argument("config: prior_strength must be >= 0");
  if (config.jobs < 0)
    throw std::invalid_argument("config: jobs must be >= 0");
  if (config.bootstrap_resamples < 100)
    throw std::invalid_argument("config: need at least 100 bootstrap resamples");
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") {
        config.n = std::stoi(value);
      } else if (key == "sigma_max") {
        config.sigma_max = std::stod(value);
      } else if (key == "epsilon") {
        config.epsilon = std::stod(value);
      } else if (key == "trials") {
        config.trials = std::stoi(value);
      } else if (key == "repeats") {
        config.repeats = std::stoi(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "prior_strength") {
        config.prior_strength = std::stod(value);
      } else if (key == "jobs") {
        config.jobs = std::stoi(value);
      } else if (key == "bootstrap_resamples") {
        config.bootstrap_resamples = std::stoi(value);
      } else if (key == "out") {
        config.output_path = value;
      } else if (key == "samplers") {
        config.samplers.clear();
        std::stringstream ss(value);
        std::string name;
        while (std::getline(ss, name, ',')) {
          name = trim(name);
          const auto kind = sampler_kind_from_string(name);
          if (!kind)
            throw std::runtime_error("unknown sampler: " + name);
          config.samplers.push_back(*kind);
        }
      } else {
        throw std::runtime_error("unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad value for " + key);
    }
  }
  return config;
}

CheckpointSchedule checkpoint_schedule(int n, int trials) {
  if (n < 2)
    throw std::invalid_argument("checkpoint_schedule: n must be >= 2");
  if (trials < 1)
    throw std::invalid_argument("checkpoint_schedule: trials must be >= 1");
  const std::int64_t pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
  CheckpointSchedule sched;
  sched.budget = pairs * trials;
  sched.interval =
      std::max<std::int64_t>(1, std::llround(static_cast<double>(n) * (n - 1) / 8.0));
  for (std::int64_t c = sched.interval; c <= sched.budget; c += sched.interval)
    sched.checkpoints.push_back(c);
  return sched;
}

std::vector<MetricPoint> run_repeat(const ExperimentConfig& config,
                                    SamplerKind kind, int repeat_index) {
  validate_config(config);
  if (repeat_index < 0 || repeat_index >= config.repeats)
    throw std::invalid_argument("run_repeat: repeat index out of range");
  if (config.trials == 0)
    return {};

  const CheckpointSchedule sched = checkpoint_schedule(config.n, config.trials);
  const auto rep = static_cast<std::uint64_t>(repeat_index);
  const auto kind_tag = static_cast<std::uint64_t>(kind);

  // Ground truth is shared by all samplers within a repeat; observer and
  // sampler streams are per-sampler so procedures do not perturb each other.
  RngStream gt_rng = RngStream::derive(config.seed, {kTagGroundTruth, rep});
  const GroundTruth gt =
      generate_ground_truth(config.n, config.sigma_max, gt_rng, config.epsilon);
  RngStream obs_rng =
      RngStream::derive(config.seed, {kTagObserver, rep, kind_tag});
  RngStream smp_rng =
      RngStream::derive(config.seed, {kTagSampler, rep, kind_tag});

  // The hybrid-mst posterior refit needs a strictly positive prior even when
  // the checkpoint fits run unregularized.
  SamplerOptions options;
  options.prior_strength =
      config.prior_strength > 0.0 ? config.prior_strength : 0.1;
  auto sampler = make_sampler(kind, config.n, options);
  WinMatrix wins(config.n);
  std::vector<MetricPoint> points;
  points.reserve(sched.checkpoints.size());
  std::size_t next_checkpoint = 0;

  for (std::int64_t c = 1; c <= sched.budget; ++c) {
    const Pair p = sampler->next_pair(smp_rng);
    const ComparisonOutcome outcome = simulate_comparison(gt, p.i, p.j, obs_rng);
    sampler->record_outcome(outcome);
    const int loser =
        outcome.pair.i == outcome.winner ? outcome.pair.j : outcome.pair.i;
    wins.add_win(outcome.winner, loser);

    if (next_checkpoint < sched.checkpoints.size() &&
        c == sched.checkpoints[next_checkpoint]) {
      ++next_checkpoint;
      MetricPoint point;
      point.comparisons_used = c;
      const ScoreVector fitted = fit_bt(wins, config.prior_strength);
      try {
        point.pcc = pearson(fitted, gt.scores);
      } catch (const UndefinedCorrelationError&) {
      } catch (const std::invalid_argument&) {
      }
      try {
        point.rocc = spearman(fitted, gt.scores);
      } catch (const UndefinedCorrelationError&) {
      } catch (const std::invalid_argument&) {
      }
      try {
        point.rmse = rmse_aligned(fitted, gt.scores);
      } catch (const TooFewPointsError&) {
      }
      points.push_back(point);
    }
  }
  return points;
}

std::vector<MetricSeries> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const int num_samplers = static_cast<int>(config.samplers.size());
  const int total_tasks = num_samplers * config.repeats;

  std::vector<std::vector<std::vector<MetricPoint>>> results(num_samplers);
  for (auto& per_sampler : results)
    per_sampler.resize(config.repeats);

  int jobs = config.jobs;
  if (jobs == 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, total_tasks);

  std::atomic<int> next_task{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    for (;;) {
      const int task = next_task.fetch_add(1);
      if (task >= total_tasks)
        return;
      const int s = task / config.repeats;
      const int r = task % config.repeats;
      try {
        results[s][r] = run_repeat(config, config.samplers[s], r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error)
          first_error = std::current_exception();
        next_task.store(total_tasks);
        return;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
      threads.emplace_back(worker);
    for (auto& t : threads)
      t.join();
  }
  if (first_error)
    std::rethrow_exception(first_error);

  // Aggregation is a fixed-order reduction over the results grid, so the
  // output does not depend on which thread ran which repeat.
  std::vector<MetricSeries> all_series;
  all_series.reserve(num_samplers);
  for (int s = 0; s < num_samplers; ++s) {
    MetricSeries series;
    series.kind = config.samplers[s];
    series.n = config.n;
    series.sigma_max = config.sigma_max;
    series.epsilon = config.epsilon;
    series.repeats = config.repeats;

    const std::size_t num_points = results[s][0].size();
    for (int r = 0; r < config.repeats; ++r) {
      if (results[s][r].size() != num_points)
        throw std::logic_error("run_experiment: ragged repeat results");
    }

    const auto kind_tag = static_cast<std::uint64_t>(series.kind);
    for (std::size_t cp = 0; cp < num_points; ++cp) {
      SeriesPoint sp;
      sp.comparisons = results[s][0][cp].comparisons_used;
      MetricStat* stats[3] = {&sp.pcc, &sp.rocc, &sp.rmse};
      for (int metric = 0; metric < 3; ++metric) {
        std::vector<double> values;
        values.reserve(config.repeats);
        for (int r = 0; r < config.repeats; ++r) {
          const MetricPoint& mp = results[s][r][cp];
          const std::optional<double>& v =
              metric == 0 ? mp.pcc : metric == 1 ? mp.rocc : mp.rmse;
          if (v)
            values.push_back(*v);
        }
        MetricStat& stat = *stats[metric];
        stat.repeats_valid = static_cast<int>(values.size());
        if (!values.empty()) {
          stat.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
          RngStream boot_rng = RngStream::derive(
              config.seed, {kTagBootstrap, kind_tag, cp,
                            static_cast<std::uint64_t>(metric)});
          const ConfidenceInterval ci = bootstrap_ci(
              values, 0.95, config.bootstrap_resamples, boot_rng);
          stat.ci_lo = ci.lo;
          stat.ci_hi = ci.hi;
        }
      }
      series.points.push_back(sp);
    }
    all_series.push_back(std::move(series));
  }
  return all_series;
}

void export_results(const std::vector<MetricSeries>& series,
                    const std::string& path) {
  if (series.empty())
    throw std::invalid_argument("export_results: no series to write");

  struct Row {
    std::string sampler;
    std::int64_t comparisons;
    std::string metric;
    std::string text;
  };
  std::vector<Row> rows;
  for (const MetricSeries& s : series) {
    const std::string sampler = to_string(s.kind);
    for (const SeriesPoint& p : s.points) {
      const std::pair<const char*, const MetricStat*> metrics[3] = {
          {"pcc", &p.pcc}, {"rocc", &p.rocc}, {"rmse", &p.rmse}};
      for (const auto& [name, stat] : metrics) {
        std::string line = sampler + "," + std::to_string(s.n) + "," +
                           format_g6(s.sigma_max) + "," + format_g6(s.epsilon) +
                           "," + std::to_string(p.comparisons) + "," + name +
                           "," + format_opt(stat->mean) + "," +
                           format_opt(stat->ci_lo) + "," +
                           format_opt(stat->ci_hi) + "," +
                           std::to_string(stat->repeats_valid);
        rows.push_back(Row{sampler, p.comparisons, name, std::move(line)});
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.sampler != b.sampler)
      return a.sampler < b.sampler;
    if (a.comparisons != b.comparisons)
      return a.comparisons < b.comparisons;
    return a.metric < b.metric;
  });

  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("export_results: cannot open " + path);
  out << "sampler,n,sigma_max,epsilon,comparisons,metric,mean,ci_lo,ci_hi,"
         "repeats_valid\n";
  for (const Row& row : rows)
    out << row.text << "\n";
  out.flush();
  if (!out)
    throw std::runtime_error("export_results: write failed for " + path);
}

std::vector<ResultRow> import_results(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("import_results: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("import_results: empty file " + path);
  if (split_csv_line(trim(line)).size() != 10)
    throw std::runtime_error("import_results: unexpected header in " + path);

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10)
      throw std::runtime_error("import_results: malformed row in " + path);
    ResultRow row;
    row.sampler = f[0];
    row.n = std::stoi(f[1]);
    row.sigma_max = std::stod(f[2]);
    row.epsilon = std::stod(f[3]);
    row.comparisons = std::stoll(f[4]);
    row.metric = f[5];
    if (!f[6].empty())
      row.mean = std::stod(f[6]);
    if (!f[7].empty())
      row.ci_lo = std::stod(f[7]);
    if (!f[8].empty())
      row.ci_hi = std::stod(f[8]);
    row.repeats_valid = std::stoi(f[9]);
    rows.push_back(std::move(row));
  }
  return rows;
}

WinMatrix read_comparisons_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_comparisons_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_comparisons_csv: empty file " + path);
  {
    const auto header = split_csv_line(trim(line));
    if (header.size() != 3 || trim(header[0]) != "i" ||
        trim(header[1]) != "j" || trim(header[2]) != "winner")
      throw std::runtime_error("read_comparisons_csv: expected header i,j,winner");
  }

  struct Entry {
    int i, j, winner;
  };
  std::vector<Entry> entries;
  int max_id = 1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3)
      throw std::runtime_error("read_comparisons_csv: malformed row at line " +
                               std::to_string(lineno));
    Entry e{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2])};
    if (e.i < 0 || e.j < 0 || e.i == e.j || (e.winner != e.i && e.winner != e.j))
      throw std::runtime_error("read_comparisons_csv: invalid comparison at line " +
                               std::to_string(lineno));
    max_id = std::max({max_id, e.i, e.j});
    entries.push_back(e);
  }
  const int size = n > 0 ? n : max_id + 1;
  WinMatrix wins(size);
  for (const Entry& e : entries) {
    const int loser = e.winner == e.i ? e.j : e.i;
    wins.add_win(e.winner, loser);
  }
  return wins;
}

} // namespace pairbench
