#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ancestry/graphs.hpp"
#include "ancestry/svar.hpp"

namespace ancestry {

// Deterministic seed derivation (splitmix64 chain); used for per-run and
// per-(run, T) substreams so parallel workers never share a stream.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Seed of the model drawn for one benchmark run; lets callers reproduce any
// run's setup outside the harness.
std::uint64_t setup_seed(std::uint64_t master_seed, int run);

struct BenchConfig {
  int d = 6;
  int p = 1;
  int n_runs = 200;
  std::vector<Eigen::Index> T_grid = {100, 1000, 10000, 100000};
  double alpha = 0.05;
  double exponent = kDefaultExponent;
  int target = 3;  // 0-based; the fourth series
  std::uint64_t master_seed = 1;
  Eigen::Index burn_in = kDefaultBurnIn;
  int threads = 0;  // 0 = hardware count; ANCESTRY_THREADS caps either way
  bool collect_null_z = false;
};

// Random benchmark model: fixed causal order, instantaneous edges with
// probability 0.2 and per-node signal-to-noise rescaling, lag-1 entries with
// probability 0.1, companion spectral radius capped at 0.95, and the
// six-distribution innovation pool permuted across components.
SvarSpec random_setup(std::uint64_t seed, int d = 6, int p = 1);

enum class AncestorClass : int {
  Instantaneous = 0,
  LaggedDirect = 1,
  LaggedInstantaneousStart = 2,
  NonAncestor = 3,
};
inline constexpr int kNumAncestorClasses = 4;
const char* to_string(AncestorClass cls);

// Ground-truth label for every (source, lag) pair with source != target,
// derived from the time-unrolled causal graph.
struct GroundTruth {
  int d = 0;
  int p = 0;
  int target = 0;
  std::vector<AncestorClass> classes;  // indexed lag * d + source

  AncestorClass at(int source, int lag) const {
    return classes.at(static_cast<std::size_t>(lag) * d + source);
  }
  bool is_ancestor(int source, int lag) const {
    return at(source, lag) != AncestorClass::NonAncestor;
  }
};

GroundTruth classify_ancestors(const SvarSpec& spec, int target, int max_lag);

struct ClassStats {
  std::int64_t pairs = 0;
  std::int64_t detected = 0;
  double sum_abs_z = 0.0;

  double detection_rate() const {
    return pairs > 0 ? static_cast<double>(detected) / static_cast<double>(pairs) : 0.0;
  }
  double mean_abs_z() const { return pairs > 0 ? sum_abs_z / static_cast<double>(pairs) : 0.0; }
};

struct BenchRow {
  Eigen::Index T = 0;
  int runs_used = 0;
  int runs_failed = 0;
  int false_positive_runs = 0;
  std::array<ClassStats, kNumAncestorClasses> per_class;
  std::vector<double> null_z;  // pooled when collect_null_z is set

  double fwer() const {
    return runs_used > 0 ? static_cast<double>(false_positive_runs) / runs_used : 0.0;
  }
  // Binomial standard error of the run-fraction estimate.
  double fwer_se() const;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;
};

// Nodewise study: per run draw a random setup, simulate at every T, run the
// Holm-corrected target analysis, and score detections against ground truth.
// Bit-identical output for a fixed master seed regardless of thread count.
BenchReport run_benchmark(const BenchConfig& cfg);

struct GraphBenchRow {
  Eigen::Index T = 0;
  int runs_used = 0;
  int runs_failed = 0;
  int inst_false_positive_runs = 0;
  int summary_false_positive_runs = 0;
  int inst_acyclic_runs = 0;
  std::int64_t inst_pairs = 0;
  std::int64_t inst_detected = 0;
  std::int64_t summary_pairs = 0;
  std::int64_t summary_detected = 0;
  std::int64_t closure_pairs = 0;     // lagged ancestors reachable only through
  std::int64_t closure_detected = 0;  // an instantaneous first step

  double inst_fwer() const {
    return runs_used > 0 ? static_cast<double>(inst_false_positive_runs) / runs_used : 0.0;
  }
  double summary_fwer() const {
    return runs_used > 0 ? static_cast<double>(summary_false_positive_runs) / runs_used : 0.0;
  }
  double inst_detection_rate() const {
    return inst_pairs > 0 ? static_cast<double>(inst_detected) / inst_pairs : 0.0;
  }
  double summary_detection_rate() const {
    return summary_pairs > 0 ? static_cast<double>(summary_detected) / summary_pairs : 0.0;
  }
  double closure_recovery_rate() const {
    return closure_pairs > 0 ? static_cast<double>(closure_detected) / closure_pairs : 0.0;
  }
  double acyclic_fraction() const {
    return runs_used > 0 ? static_cast<double>(inst_acyclic_runs) / runs_used : 0.0;
  }
};

struct GraphBenchReport {
  BenchConfig config;
  std::vector<GraphBenchRow> rows;
};

// Full-graph study: instantaneous and summary graphs scored against the
// ground-truth ancestor relations of every node.
GraphBenchReport run_graph_benchmark(const BenchConfig& cfg);

nlohmann::json to_json(const BenchReport& report);
nlohmann::json to_json(const GraphBenchReport& report);

// Flat CSV, one row per T x class x metric.
std::string to_csv(const BenchReport& report);
std::string to_csv(const GraphBenchReport& report);

}  // namespace ancestry
