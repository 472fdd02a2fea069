// pairbench._core: python bindings for the sampling procedures, the
// Bradley-Terry model core, the simulated observer, and the benchmark
// harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pairbench/errors.hpp"
#include "pairbench/harness.hpp"

namespace py = pybind11;
using namespace pairbench;

namespace {

WinMatrix win_matrix_from_rows(
    const std::vector<std::vector<std::int64_t>>& rows) {
  const int n = static_cast<int>(rows.size());
  WinMatrix wins(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw std::invalid_argument("win matrix rows must form an n x n grid");
    for (int j = 0; j < n; ++j)
      if (i != j && rows[i][j] != 0)
        wins.add_win(i, j, rows[i][j]);
  }
  return wins;
}

std::map<Pair, double> weights_from_dict(
    const std::map<std::pair<int, int>, double>& edges) {
  std::map<Pair, double> weights;
  for (const auto& [edge, w] : edges)
    weights[make_pair(edge.first, edge.second)] = w;
  return weights;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pairwise-comparison sampling procedures, Bradley-Terry scoring, "
            "and a Monte Carlo benchmark harness";

  py::register_exception<UnidentifiableModelError>(m, "UnidentifiableModelError",
                                                   PyExc_RuntimeError);
  py::register_exception<UndefinedCorrelationError>(
      m, "UndefinedCorrelationError", PyExc_RuntimeError);
  py::register_exception<ProtocolViolationError>(m, "ProtocolViolationError",
                                                 PyExc_RuntimeError);
  py::register_exception<InvalidStateError>(m, "InvalidStateError",
                                            PyExc_RuntimeError);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static(
          "derive",
          [](std::uint64_t root, const std::vector<std::uint64_t>& path) {
            RngStream stream(root);
            std::uint64_t h = root;
            // mirror RngStream::derive for arbitrary-length paths
            switch (path.size()) {
            case 0:
              return RngStream::derive(root, {});
            case 1:
              return RngStream::derive(root, {path[0]});
            case 2:
              return RngStream::derive(root, {path[0], path[1]});
            default:
              return RngStream::derive(root, {path[0], path[1], path[2]});
            }
            (void)h;
            return stream;
          },
          py::arg("root"), py::arg("path"))
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("uniform",
           py::overload_cast<double, double>(&RngStream::uniform),
           py::arg("a"), py::arg("b"))
      .def("normal", &RngStream::normal, py::arg("mean"), py::arg("stddev"))
      .def("uniform_int", &RngStream::uniform_int, py::arg("lo"), py::arg("hi"));

  py::class_<WinMatrix>(m, "WinMatrix")
      .def(py::init<int>(), py::arg("n"))
      .def(py::init(&win_matrix_from_rows), py::arg("rows"))
      .def("add_win", &WinMatrix::add_win, py::arg("winner"), py::arg("loser"),
           py::arg("times") = 1)
      .def("count", &WinMatrix::count, py::arg("winner"), py::arg("loser"))
      .def("games", &WinMatrix::games, py::arg("i"), py::arg("j"))
      .def("total", &WinMatrix::total)
      .def_property_readonly("n", &WinMatrix::size);

  m.def("bt_win_probability", &bt_win_probability, py::arg("s_i"),
        py::arg("s_j"));
  m.def("thurstone_win_probability", &thurstone_win_probability,
        py::arg("mu_i"), py::arg("mu_j"), py::arg("sigma_i"),
        py::arg("sigma_j"));
  m.def("bt_log_likelihood", &bt_log_likelihood, py::arg("scores"),
        py::arg("wins"), py::arg("prior_strength") = 0.0);
  m.def("bt_log_likelihood_gradient", &bt_log_likelihood_gradient,
        py::arg("scores"), py::arg("wins"), py::arg("prior_strength") = 0.0);
  m.def("bt_laplace_variances", &bt_laplace_variances, py::arg("scores"),
        py::arg("wins"), py::arg("prior_strength") = 0.0);
  m.def("fit_bt", py::overload_cast<const WinMatrix&, double>(&fit_bt),
        py::arg("wins"), py::arg("prior_strength") = 0.1);
  m.def(
      "fit_bt",
      [](const std::vector<std::vector<std::int64_t>>& rows, double prior) {
        return fit_bt(win_matrix_from_rows(rows), prior);
      },
      py::arg("rows"), py::arg("prior_strength") = 0.1);
  m.def("elo_update", &elo_update, py::arg("ratings"), py::arg("i"),
        py::arg("j"), py::arg("winner"));
  m.def(
      "sigmoid_align",
      [](const ScoreVector& estimated, const ScoreVector& reference) {
        const AlignResult r = sigmoid_align(estimated, reference);
        return py::make_tuple(r.values, r.degenerate);
      },
      py::arg("estimated"), py::arg("reference"),
      "Returns (aligned_values, degenerate)");

  m.def("pearson", [](const std::vector<double>& a,
                      const std::vector<double>& b) { return pearson(a, b); });
  m.def("spearman", [](const std::vector<double>& a,
                       const std::vector<double>& b) { return spearman(a, b); });
  m.def("rmse_aligned", &rmse_aligned, py::arg("estimated"),
        py::arg("reference"));
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& samples, double level, int resamples,
         RngStream& rng) {
        const ConfidenceInterval ci = bootstrap_ci(samples, level, resamples, rng);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("samples"), py::arg("level") = 0.95, py::arg("resamples") = 1000,
      py::arg("rng"));

  m.def(
      "minimum_spanning_tree",
      [](int n, const std::map<std::pair<int, int>, double>& edges) {
        std::vector<std::pair<int, int>> out;
        for (const Pair& p : minimum_spanning_tree(n, weights_from_dict(edges)))
          out.emplace_back(p.i, p.j);
        return out;
      },
      py::arg("n"), py::arg("weights"),
      "weights: dict mapping (i, j) tuples to edge weights");

  py::class_<PosteriorApprox>(m, "PosteriorApprox")
      .def(py::init([](ScoreVector mean, std::vector<double> variance) {
             return PosteriorApprox{std::move(mean), std::move(variance)};
           }),
           py::arg("mean"), py::arg("variance"))
      .def_readwrite("mean", &PosteriorApprox::mean)
      .def_readwrite("variance", &PosteriorApprox::variance);
  m.def("expected_information_gain", &expected_information_gain,
        py::arg("posterior"), py::arg("i"), py::arg("j"));
  m.def(
      "elo_rank_weights",
      [](const EloRatings& ratings) {
        std::map<std::pair<int, int>, double> out;
        for (const auto& [p, w] : elo_rank_weights(ratings))
          out[{p.i, p.j}] = w;
        return out;
      },
      py::arg("ratings"));

  py::enum_<SamplerKind>(m, "SamplerKind")
      .value("RANDOM", SamplerKind::kRandom)
      .value("KNOCKOUT", SamplerKind::kKnockout)
      .value("SWISS", SamplerKind::kSwiss)
      .value("TREE_SELECT", SamplerKind::kTreeSelect)
      .value("SORT_MST", SamplerKind::kSortMst)
      .value("HYBRID_MST", SamplerKind::kHybridMst);
  m.def("sampler_kind_from_string",
        [](const std::string& name) { return sampler_kind_from_string(name); });
  m.def("sampler_kind_name",
        [](SamplerKind kind) { return std::string(to_string(kind)); });

  py::class_<Sampler>(m, "Sampler")
      .def("next_pair",
           [](Sampler& s, RngStream& rng) {
             const Pair p = s.next_pair(rng);
             return std::make_pair(p.i, p.j);
           })
      .def("record_outcome",
           [](Sampler& s, int i, int j, int winner) {
             s.record_outcome(ComparisonOutcome{make_pair(i, j), winner});
           },
           py::arg("i"), py::arg("j"), py::arg("winner"))
      .def_property_readonly("kind", &Sampler::kind)
      .def_property_readonly("n", &Sampler::stimulus_count)
      .def_property_readonly("history",
                             [](const Sampler& s) {
                               std::vector<std::tuple<int, int, int>> out;
                               for (const auto& o : s.history())
                                 out.emplace_back(o.pair.i, o.pair.j, o.winner);
                               return out;
                             })
      .def_property_readonly("last_batch", [](const Sampler& s) {
        std::vector<std::pair<int, int>> out;
        for (const Pair& p : s.last_batch())
          out.emplace_back(p.i, p.j);
        return out;
      });
  m.def(
      "make_sampler",
      [](SamplerKind kind, int n, double prior_strength) {
        return make_sampler(kind, n, SamplerOptions{prior_strength});
      },
      py::arg("kind"), py::arg("n"), py::arg("prior_strength") = 0.1);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init<>())
      .def_readwrite("scores", &GroundTruth::scores)
      .def_readwrite("sigmas", &GroundTruth::sigmas)
      .def_readwrite("epsilon", &GroundTruth::epsilon);
  m.def("generate_ground_truth", &generate_ground_truth, py::arg("n"),
        py::arg("sigma_max"), py::arg("rng"), py::arg("epsilon") = 0.0);
  m.def(
      "simulate_comparison",
      [](const GroundTruth& gt, int i, int j, RngStream& rng) {
        const ComparisonOutcome o = simulate_comparison(gt, i, j, rng);
        return std::make_tuple(o.pair.i, o.pair.j, o.winner);
      },
      py::arg("ground_truth"), py::arg("i"), py::arg("j"), py::arg("rng"));

  py::class_<CheckpointSchedule>(m, "CheckpointSchedule")
      .def_readonly("budget", &CheckpointSchedule::budget)
      .def_readonly("interval", &CheckpointSchedule::interval)
      .def_readonly("checkpoints", &CheckpointSchedule::checkpoints);
  m.def("checkpoint_schedule", &checkpoint_schedule, py::arg("n"),
        py::arg("trials"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("sigma_max", &ExperimentConfig::sigma_max)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("samplers", &ExperimentConfig::samplers)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("repeats", &ExperimentConfig::repeats)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("prior_strength", &ExperimentConfig::prior_strength)
      .def_readwrite("jobs", &ExperimentConfig::jobs)
      .def_readwrite("bootstrap_resamples", &ExperimentConfig::bootstrap_resamples)
      .def_readwrite("output_path", &ExperimentConfig::output_path);

  py::class_<MetricPoint>(m, "MetricPoint")
      .def_readonly("comparisons_used", &MetricPoint::comparisons_used)
      .def_readonly("pcc", &MetricPoint::pcc)
      .def_readonly("rocc", &MetricPoint::rocc)
      .def_readonly("rmse", &MetricPoint::rmse);
  py::class_<MetricStat>(m, "MetricStat")
      .def_readonly("mean", &MetricStat::mean)
      .def_readonly("ci_lo", &MetricStat::ci_lo)
      .def_readonly("ci_hi", &MetricStat::ci_hi)
      .def_readonly("repeats_valid", &MetricStat::repeats_valid);
  py::class_<SeriesPoint>(m, "SeriesPoint")
      .def_readonly("comparisons", &SeriesPoint::comparisons)
      .def_readonly("pcc", &SeriesPoint::pcc)
      .def_readonly("rocc", &SeriesPoint::rocc)
      .def_readonly("rmse", &SeriesPoint::rmse);
  py::class_<MetricSeries>(m, "MetricSeries")
      .def_readonly("kind", &MetricSeries::kind)
      .def_readonly("n", &MetricSeries::n)
      .def_readonly("sigma_max", &MetricSeries::sigma_max)
      .def_readonly("epsilon", &MetricSeries::epsilon)
      .def_readonly("repeats", &MetricSeries::repeats)
      .def_readonly("points", &MetricSeries::points);

  m.def("run_repeat", &run_repeat, py::arg("config"), py::arg("kind"),
        py::arg("repeat_index"), py::call_guard<py::gil_scoped_release>());
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("export_results", &export_results, py::arg("series"), py::arg("path"));
  m.def("load_config_file", &load_config_file, py::arg("path"));
}
