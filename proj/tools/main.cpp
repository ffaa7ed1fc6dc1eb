#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "ancestry/ancestor.hpp"
#include "ancestry/csv.hpp"
#include "ancestry/errors.hpp"
#include "ancestry/graphs.hpp"
#include "ancestry/multiplicity.hpp"
#include "ancestry/simbench.hpp"
#include "ancestry/svar.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string input;
  int order = 1;
  double alpha = 0.05;
  double exponent = ancestry::kDefaultExponent;
  bool center = true;
  std::string target;
  std::string shift_col;
  std::uint64_t seed = 1;
  std::string out = ".";
  double rank_tol = ancestry::kDefaultRankTol;
};

void add_analysis_flags(CLI::App* cmd, CommonOpts& opts, bool with_target) {
  cmd->add_option("--input", opts.input, "input CSV with a header row")->required();
  cmd->add_option("--order", opts.order, "autoregressive order p")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", opts.alpha, "significance level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  cmd->add_option("--exponent", opts.exponent, "nonlinearity exponent (> 1)")
      ->check(CLI::Range(std::nextafter(1.0, 2.0), 1e6))
      ->capture_default_str();
  cmd->add_flag("--center,!--no-center", opts.center,
                "subtract sample means before the regressions")
      ->capture_default_str();
  cmd->add_option("--shift-col", opts.shift_col,
                  "realign this column to the following row, dropping one row");
  cmd->add_option("--seed", opts.seed, "seed echoed into outputs")->capture_default_str();
  cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
  cmd->add_option("--rank-tol", opts.rank_tol,
                  "relative singular-value cutoff for rank checks")
      ->capture_default_str();
  if (with_target) {
    cmd->add_option("--target", opts.target, "target series (name or 1-based index)")
        ->required();
  }
}

int resolve_series(const ancestry::TimeSeries& x, const std::string& key) {
  for (std::size_t c = 0; c < x.names.size(); ++c) {
    if (x.names[c] == key) return static_cast<int>(c);
  }
  try {
    const int idx = std::stoi(key);
    if (idx >= 1 && idx <= x.d()) return idx - 1;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("unknown series '" + key + "'");
}

ancestry::TimeSeries load_input(const CommonOpts& opts) {
  ancestry::TimeSeries x = ancestry::ingest_csv(opts.input);
  if (!opts.shift_col.empty()) x = ancestry::shift_column(x, opts.shift_col);
  return x;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ancestry::IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out.good()) throw ancestry::IoError("failed while writing '" + path.string() + "'");
}

fs::path prepare_out(const std::string& dir) {
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ancestry::IoError("cannot create output directory '" + dir + "'");
  return out;
}

std::string sci(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", p);
  return buf;
}

json config_json(const CommonOpts& opts) {
  return json{{"input", opts.input},   {"order", opts.order},
              {"alpha", opts.alpha},   {"exponent", opts.exponent},
              {"center", opts.center}, {"shift_col", opts.shift_col},
              {"seed", opts.seed},     {"rank_tol", opts.rank_tol}};
}

json tensor_rows(const ancestry::EdgePValueTensor& tensor) {
  json rows = json::array();
  for (const auto& t : tensor.tests) rows.push_back(ancestry::to_json(t));
  return rows;
}

json pair_matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (k == j) continue;
      rows.push_back(json{{"k", k + 1}, {"j", j + 1}, {"p", m(k, j)}});
    }
  }
  return rows;
}

Eigen::MatrixXd holm_offdiagonal(const Eigen::MatrixXd& raw) {
  const Eigen::Index d = raw.rows();
  std::vector<double> ps;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (k != j) ps.push_back(raw(k, j));
    }
  }
  const std::vector<double> corrected = ancestry::holm(ps);
  Eigen::MatrixXd out = raw;
  std::size_t idx = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (k != j) out(k, j) = corrected[idx++];
    }
  }
  return out;
}

int cmd_test(const CommonOpts& opts) {
  const ancestry::TimeSeries x = load_input(opts);
  const int target = resolve_series(x, opts.target);
  const ancestry::TargetAnalysis analysis = ancestry::target_analysis(
      x, opts.order, target, opts.alpha, opts.exponent, opts.center, opts.rank_tol);

  json result{{"command", "test"},
              {"config", config_json(opts)},
              {"names", x.names},
              {"T", x.T()},
              {"analysis", ancestry::to_json(analysis)}};
  const fs::path out = prepare_out(opts.out);
  write_text(out / "results.json", result.dump(2) + "\n");

  std::cout << "target " << x.names[target] << ": ";
  bool any = false;
  for (const auto& d : analysis.decisions) {
    if (!d.detected) continue;
    std::cout << (any ? ", " : "") << x.names[d.test.source] << "->"
              << x.names[d.test.target] << " (tau=" << d.test.lag
              << ", p=" << sci(d.test.p_value) << ")";
    any = true;
  }
  std::cout << (any ? "" : "no ancestors detected") << "\n";
  std::cout << "wrote " << (out / "results.json").string() << "\n";
  return 0;
}

int cmd_graph(const CommonOpts& opts, bool summary) {
  const ancestry::TimeSeries x = load_input(opts);
  const ancestry::EdgePValueTensor tensor =
      ancestry::all_pairs_tests(x, opts.order, opts.exponent, opts.center, opts.rank_tol);

  json result{{"command", summary ? "summary" : "graph"},
              {"config", config_json(opts)},
              {"names", x.names},
              {"T", x.T()},
              {"tests", tensor_rows(tensor)}};

  ancestry::AncestralGraph graph;
  if (summary) {
    const Eigen::MatrixXd combined = ancestry::summary_pvalues(tensor);
    result["combined"] = pair_matrix_json(combined);
    result["corrected"] = pair_matrix_json(holm_offdiagonal(combined));
    graph = ancestry::summary_graph(tensor, x.names, opts.alpha);
  } else {
    Eigen::MatrixXd raw(x.d(), x.d());
    raw.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < tensor.d; ++k) {
      for (int j = 0; j < tensor.d; ++j) {
        if (k != j) raw(k, j) = tensor.p_value(k, j, 0);
      }
    }
    result["corrected"] = pair_matrix_json(holm_offdiagonal(raw));
    graph = ancestry::instantaneous_graph(tensor, x.names, opts.alpha);
  }
  result["graph"] = ancestry::to_json(graph);

  const fs::path out = prepare_out(opts.out);
  write_text(out / "results.json", result.dump(2) + "\n");
  write_text(out / "graph.dot", ancestry::to_dot(graph));

  std::cout << (summary ? "summary" : "instantaneous") << " graph: "
            << graph.edges.size() << " edge(s)";
  if (graph.violation_alpha) {
    std::cout << ", violation_alpha=" << sci(*graph.violation_alpha);
  }
  std::cout << "\n";
  for (const auto& e : graph.edges) {
    std::cout << "  " << graph.names[e.from] << " -> " << graph.names[e.to];
    if (e.p) {
      std::cout << " (p=" << sci(*e.p) << ")";
    } else {
      std::cout << " (closure)";
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << (out / "results.json").string() << ", "
            << (out / "graph.dot").string() << "\n";
  return 0;
}

int cmd_simulate(const std::string& spec_path, Eigen::Index T, Eigen::Index burn_in,
                 std::uint64_t seed, const std::string& out_dir) {
  std::ifstream in(spec_path);
  if (!in) throw ancestry::IoError("cannot open '" + spec_path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ancestry::ParseError(spec_path + ": " + e.what());
  }
  const ancestry::SvarSpec spec = ancestry::svar_from_json(doc);
  const ancestry::TimeSeries x = ancestry::simulate(spec, T, burn_in, seed);

  const fs::path out = prepare_out(out_dir);
  ancestry::write_csv(x, (out / "simulated.csv").string());
  std::cout << "wrote " << (out / "simulated.csv").string() << " (" << x.T() << " x "
            << x.d() << ")\n";
  return 0;
}

struct BenchOpts {
  int d = 6;
  int order = 1;
  int runs = 200;
  std::vector<Eigen::Index> T;
  double alpha = 0.05;
  double exponent = ancestry::kDefaultExponent;
  int target = 4;  // 1-based
  std::uint64_t seed = 1;
  Eigen::Index burn_in = ancestry::kDefaultBurnIn;
  std::string out = ".";
  int threads = 0;
  bool graphs = false;
  bool full = false;
  bool dump_setups = false;
};

int cmd_bench(const BenchOpts& opts) {
  ancestry::BenchConfig cfg;
  cfg.d = opts.d;
  cfg.p = opts.order;
  cfg.n_runs = opts.full ? 1000 : opts.runs;
  if (!opts.T.empty()) {
    cfg.T_grid = opts.T;
  } else if (opts.full) {
    cfg.T_grid = {100, 1000, 10000, 100000, 1000000};
  }
  cfg.alpha = opts.alpha;
  cfg.exponent = opts.exponent;
  cfg.target = opts.target - 1;
  cfg.master_seed = opts.seed;
  cfg.burn_in = opts.burn_in;
  cfg.threads = opts.threads;

  const fs::path out = prepare_out(opts.out);
  json doc;
  std::string csv;
  if (opts.graphs) {
    const ancestry::GraphBenchReport report = ancestry::run_graph_benchmark(cfg);
    doc = ancestry::to_json(report);
    csv = ancestry::to_csv(report);
    for (const auto& row : report.rows) {
      std::cout << "T=" << row.T << " inst fwer=" << row.inst_fwer()
                << " det=" << row.inst_detection_rate()
                << " | summary fwer=" << row.summary_fwer()
                << " det=" << row.summary_detection_rate() << "\n";
    }
  } else {
    const ancestry::BenchReport report = ancestry::run_benchmark(cfg);
    doc = ancestry::to_json(report);
    csv = ancestry::to_csv(report);
    for (const auto& row : report.rows) {
      std::cout << "T=" << row.T << " fwer=" << row.fwer() << " null mean|z|="
                << row.per_class[static_cast<int>(ancestry::AncestorClass::NonAncestor)]
                       .mean_abs_z()
                << "\n";
    }
  }
  write_text(out / "bench.json", doc.dump(2) + "\n");
  write_text(out / "bench.csv", csv);
  if (opts.dump_setups) {
    json setups = json::array();
    for (int run = 0; run < cfg.n_runs; ++run) {
      setups.push_back(ancestry::to_json(ancestry::random_setup(
          ancestry::setup_seed(cfg.master_seed, run), cfg.d, cfg.p)));
    }
    write_text(out / "setups.json", setups.dump(2) + "\n");
  }
  std::cout << "wrote " << (out / "bench.json").string() << ", "
            << (out / "bench.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal ancestor detection in vector autoregressive time series"};
  app.require_subcommand(1);

  CommonOpts test_opts;
  CLI::App* test_cmd =
      app.add_subcommand("test", "nodewise ancestor tests for one target series");
  add_analysis_flags(test_cmd, test_opts, /*with_target=*/true);

  CommonOpts graph_opts;
  CLI::App* graph_cmd =
      app.add_subcommand("graph", "instantaneous ancestral graph (always acyclic)");
  add_analysis_flags(graph_cmd, graph_opts, /*with_target=*/false);

  CommonOpts summary_opts;
  CLI::App* summary_cmd =
      app.add_subcommand("summary", "summary time graph over all lags");
  add_analysis_flags(summary_cmd, summary_opts, /*with_target=*/false);

  std::string sim_spec;
  Eigen::Index sim_T = 1000;
  Eigen::Index sim_burn = ancestry::kDefaultBurnIn;
  std::uint64_t sim_seed = 1;
  std::string sim_out = ".";
  CLI::App* sim_cmd = app.add_subcommand("simulate", "simulate a model from a JSON spec");
  sim_cmd->add_option("--spec", sim_spec, "model spec JSON")->required();
  sim_cmd->add_option("--T", sim_T, "observations to keep")->capture_default_str();
  sim_cmd->add_option("--burn-in", sim_burn, "discarded warmup steps")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "output directory")->capture_default_str();

  BenchOpts bench_opts;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Monte Carlo calibration/power study");
  bench_cmd->add_option("--d", bench_opts.d, "number of series")->capture_default_str();
  bench_cmd->add_option("--order", bench_opts.order, "model order")->capture_default_str();
  bench_cmd->add_option("--runs", bench_opts.runs, "simulation runs")->capture_default_str();
  bench_cmd->add_option("--T", bench_opts.T, "sample sizes")->delimiter(',');
  bench_cmd->add_option("--alpha", bench_opts.alpha, "significance level")->capture_default_str();
  bench_cmd->add_option("--exponent", bench_opts.exponent, "nonlinearity exponent")
      ->check(CLI::Range(std::nextafter(1.0, 2.0), 1e6))
      ->capture_default_str();
  bench_cmd->add_option("--target", bench_opts.target, "1-based target series")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_opts.seed, "master seed")->capture_default_str();
  bench_cmd->add_option("--burn-in", bench_opts.burn_in, "discarded warmup steps")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_opts.out, "output directory")->capture_default_str();
  bench_cmd->add_option("--threads", bench_opts.threads,
                        "worker threads (0 = hardware; ANCESTRY_THREADS caps)")
      ->capture_default_str();
  bench_cmd->add_flag("--graphs", bench_opts.graphs, "score full graphs instead of one target");
  bench_cmd->add_flag("--full", bench_opts.full, "large-scale study: 1000 runs, T up to 1e6");
  bench_cmd->add_flag("--dump-setups", bench_opts.dump_setups,
                      "also write every generated model spec to setups.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (test_cmd->parsed()) return cmd_test(test_opts);
    if (graph_cmd->parsed()) return cmd_graph(graph_opts, /*summary=*/false);
    if (summary_cmd->parsed()) return cmd_graph(summary_opts, /*summary=*/true);
    if (sim_cmd->parsed()) return cmd_simulate(sim_spec, sim_T, sim_burn, sim_seed, sim_out);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts);
  } catch (const ancestry::Error& e) {
    std::cout << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cout << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  }
  return 0;
}
