#include "ancestry/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <random>
#include <sstream>
#include <thread>

namespace ancestry {

namespace {

constexpr double kTargetRadius = 0.95;
constexpr double kZeroTol = 1e-12;
constexpr std::uint64_t kSetupSalt = 1;
constexpr std::uint64_t kSimSalt = 2;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ANCESTRY_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

// Runs `body(run_index)` over [0, n_runs) on a small worker pool. Results are
// written into per-run slots by the callers, so aggregation order stays
// independent of scheduling.
template <typename Body>
void parallel_runs(int n_runs, int threads, const Body& body) {
  threads = std::min(threads, n_runs);
  if (threads <= 1) {
    for (int i = 0; i < n_runs; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_runs) break;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 0; t < threads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::vector<std::vector<char>> support_closure(const std::vector<std::vector<char>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) {
    std::deque<int> queue{s};
    std::vector<char> seen(n, 0);
    seen[s] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w = 0; w < n; ++w) {
        if (adj[v][w] && !seen[w]) {
          seen[w] = 1;
          reach[s][w] = 1;
          queue.push_back(w);
        }
      }
    }
  }
  return reach;
}

std::vector<std::vector<char>> b0_support(const SvarSpec& spec) {
  std::vector<std::vector<char>> adj(spec.d, std::vector<char>(spec.d, 0));
  for (int j = 0; j < spec.d; ++j) {
    for (int k = 0; k < spec.d; ++k) {
      if (std::abs(spec.B[0](j, k)) > kZeroTol) adj[k][j] = 1;
    }
  }
  return adj;
}

void validate_config(const BenchConfig& cfg) {
  if (cfg.d < 2) throw std::invalid_argument("benchmark needs d >= 2");
  if (cfg.p < 0) throw std::invalid_argument("benchmark needs p >= 0");
  if (cfg.n_runs < 1) throw std::invalid_argument("benchmark needs at least one run");
  if (cfg.target < 0 || cfg.target >= cfg.d) {
    throw std::invalid_argument("benchmark target out of range");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  for (const Eigen::Index T : cfg.T_grid) {
    if (T < 10 * static_cast<Eigen::Index>(cfg.d) * (cfg.p + 1)) {
      throw std::invalid_argument("T must be at least 10 * d * (p + 1)");
    }
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ splitmix64(b + 0x2545f4914f6cdd1dULL));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

std::uint64_t setup_seed(std::uint64_t master_seed, int run) {
  return mix_seed(master_seed, kSetupSalt, static_cast<std::uint64_t>(run));
}

SvarSpec random_setup(std::uint64_t seed, int d, int p) {
  if (d < 2) throw std::invalid_argument("random setup needs d >= 2");
  if (p < 1) throw std::invalid_argument("random setup needs p >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution inst_edge(0.2);
  std::bernoulli_distribution lag_edge(0.1);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> inst_weight(0.5, 1.0);
  std::uniform_real_distribution<double> lag_weight(0.2, 0.8);
  std::uniform_real_distribution<double> target_sd(std::sqrt(0.5), std::sqrt(2.0));

  SvarSpec spec;
  spec.d = d;
  spec.p = p;
  spec.B.assign(p + 1, Eigen::MatrixXd::Zero(d, d));

  // Causal order fixed 1..d: lower-triangular instantaneous support.
  for (int j = 1; j < d; ++j) {
    for (int k = 0; k < j; ++k) {
      if (inst_edge(rng)) spec.B[0](j, k) = inst_weight(rng);
    }
  }

  // Rescale incoming weights node by node so that the contribution of the
  // other innovations to the reduced-form innovation has the drawn standard
  // deviation. Rows of (I - B0)^{-1} are built progressively in causal order.
  Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(d, d);
  for (int j = 0; j < d; ++j) {
    Eigen::RowVectorXd contribution = Eigen::RowVectorXd::Zero(d);
    for (int k = 0; k < j; ++k) {
      if (spec.B[0](j, k) != 0.0) contribution += spec.B[0](j, k) * mix.row(k);
    }
    const double sd = contribution.norm();
    if (sd > 0.0) {
      const double scale = target_sd(rng) / sd;
      spec.B[0].row(j) *= scale;
      contribution *= scale;
    }
    mix.row(j) += contribution;
  }

  for (int tau = 1; tau <= p; ++tau) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        if (lag_edge(rng)) {
          const double w = lag_weight(rng);
          spec.B[tau](j, k) = coin(rng) ? w : -w;
        }
      }
    }
  }

  const std::vector<NoiseSpec> pool = {
      {NoiseKind::StudentT, 7.0}, {NoiseKind::StudentT, 7.0},
      {NoiseKind::Uniform},       {NoiseKind::Uniform},
      {NoiseKind::Laplace},       {NoiseKind::Normal}};
  spec.noise.resize(d);
  for (int k = 0; k < d; ++k) spec.noise[k] = pool[k % pool.size()];
  std::shuffle(spec.noise.begin(), spec.noise.end(), rng);

  // Shrink the lag matrices until the companion spectral radius is capped.
  // For p = 1 the radius scales linearly, so one pass lands exactly on the cap.
  for (int iter = 0; iter < 64; ++iter) {
    const double radius = is_stable(spec).spectral_radius;
    if (radius <= kTargetRadius + 1e-12) break;
    const double scale = kTargetRadius / radius;
    for (int tau = 1; tau <= p; ++tau) spec.B[tau] *= scale;
  }
  return spec;
}

const char* to_string(AncestorClass cls) {
  switch (cls) {
    case AncestorClass::Instantaneous:
      return "instantaneous_ancestor";
    case AncestorClass::LaggedDirect:
      return "lagged_direct";
    case AncestorClass::LaggedInstantaneousStart:
      return "lagged_instantaneous_start";
    case AncestorClass::NonAncestor:
      return "non_ancestor";
  }
  return "unknown";
}

GroundTruth classify_ancestors(const SvarSpec& spec, int target, int max_lag) {
  if (target < 0 || target >= spec.d) {
    throw std::invalid_argument("classification target out of range");
  }
  if (max_lag < 0) throw std::invalid_argument("negative lag");
  const int d = spec.d;
  const auto btil = reduced_form(spec);
  const auto inst_reach = support_closure(b0_support(spec));

  GroundTruth gt;
  gt.d = d;
  gt.p = max_lag;
  gt.target = target;
  gt.classes.assign(static_cast<std::size_t>(max_lag + 1) * d, AncestorClass::NonAncestor);

  for (int k = 0; k < d; ++k) {
    if (k == target) continue;
    if (inst_reach[k][target]) {
      gt.classes[k] = AncestorClass::Instantaneous;
    }
  }

  for (int tau = 1; tau <= max_lag; ++tau) {
    // Unrolled graph over slices 0..tau; node (s, a) has index s * d + a.
    const int slices = tau + 1;
    std::vector<std::vector<char>> adj(slices * d, std::vector<char>(slices * d, 0));
    for (int s = 0; s < slices; ++s) {
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          if (std::abs(spec.B[0](j, k)) > kZeroTol) adj[s * d + k][s * d + j] = 1;
          for (int lag = 1; lag <= spec.p && s + lag < slices; ++lag) {
            if (std::abs(spec.B[lag](j, k)) > kZeroTol) {
              adj[s * d + k][(s + lag) * d + j] = 1;
            }
          }
        }
      }
    }
    const auto reach = support_closure(adj);
    for (int k = 0; k < d; ++k) {
      if (k == target) continue;
      const bool ancestor = reach[k][tau * d + target] != 0;
      if (!ancestor) continue;
      const bool direct =
          tau <= spec.p && std::abs(btil[tau - 1](target, k)) > kZeroTol;
      gt.classes[static_cast<std::size_t>(tau) * d + k] =
          direct ? AncestorClass::LaggedDirect
                 : AncestorClass::LaggedInstantaneousStart;
    }
  }
  return gt;
}

double BenchRow::fwer_se() const {
  if (runs_used == 0) return 0.0;
  const double f = fwer();
  return std::sqrt(f * (1.0 - f) / runs_used);
}

namespace {

struct NodeCell {
  bool failed = false;
  bool any_false = false;
  std::array<std::int64_t, kNumAncestorClasses> pairs{};
  std::array<std::int64_t, kNumAncestorClasses> detected{};
  std::array<double, kNumAncestorClasses> sum_abs_z{};
  std::vector<double> null_z;
};

struct GraphCell {
  bool failed = false;
  bool inst_false = false;
  bool summary_false = false;
  bool inst_acyclic = false;
  std::int64_t inst_pairs = 0, inst_detected = 0;
  std::int64_t summary_pairs = 0, summary_detected = 0;
  std::int64_t closure_pairs = 0, closure_detected = 0;
};

}  // namespace

BenchReport run_benchmark(const BenchConfig& cfg) {
  validate_config(cfg);
  const int n_t = static_cast<int>(cfg.T_grid.size());
  std::vector<std::vector<NodeCell>> cells(
      cfg.n_runs, std::vector<NodeCell>(n_t));

  parallel_runs(cfg.n_runs, resolve_threads(cfg.threads), [&](int run) {
    SvarSpec spec;
    GroundTruth gt;
    try {
      spec = random_setup(setup_seed(cfg.master_seed, run), cfg.d, cfg.p);
      gt = classify_ancestors(spec, cfg.target, cfg.p);
    } catch (const std::exception&) {
      for (auto& cell : cells[run]) cell.failed = true;
      return;
    }
    for (int ti = 0; ti < n_t; ++ti) {
      NodeCell& cell = cells[run][ti];
      try {
        const TimeSeries x = simulate(spec, cfg.T_grid[ti], cfg.burn_in,
                                      mix_seed(mix_seed(cfg.master_seed, kSimSalt, run), ti));
        const TargetAnalysis ta =
            target_analysis(x, cfg.p, cfg.target, cfg.alpha, cfg.exponent);
        for (const auto& decision : ta.decisions) {
          const AncestorClass cls = gt.at(decision.test.source, decision.test.lag);
          const int ci = static_cast<int>(cls);
          ++cell.pairs[ci];
          cell.sum_abs_z[ci] += std::abs(decision.test.z);
          if (decision.detected) {
            ++cell.detected[ci];
            if (cls == AncestorClass::NonAncestor) cell.any_false = true;
          }
          if (cfg.collect_null_z && cls == AncestorClass::NonAncestor) {
            cell.null_z.push_back(decision.test.z);
          }
        }
      } catch (const std::exception&) {
        cell.failed = true;
      }
    }
  });

  BenchReport report;
  report.config = cfg;
  report.rows.resize(n_t);
  for (int ti = 0; ti < n_t; ++ti) {
    BenchRow& row = report.rows[ti];
    row.T = cfg.T_grid[ti];
    for (int run = 0; run < cfg.n_runs; ++run) {
      const NodeCell& cell = cells[run][ti];
      if (cell.failed) {
        ++row.runs_failed;
        continue;
      }
      ++row.runs_used;
      if (cell.any_false) ++row.false_positive_runs;
      for (int ci = 0; ci < kNumAncestorClasses; ++ci) {
        row.per_class[ci].pairs += cell.pairs[ci];
        row.per_class[ci].detected += cell.detected[ci];
        row.per_class[ci].sum_abs_z += cell.sum_abs_z[ci];
      }
      row.null_z.insert(row.null_z.end(), cell.null_z.begin(), cell.null_z.end());
    }
  }
  return report;
}

GraphBenchReport run_graph_benchmark(const BenchConfig& cfg) {
  validate_config(cfg);
  if (cfg.p < 1) throw std::invalid_argument("graph benchmark needs p >= 1");
  const int n_t = static_cast<int>(cfg.T_grid.size());
  std::vector<std::vector<GraphCell>> cells(
      cfg.n_runs, std::vector<GraphCell>(n_t));

  parallel_runs(cfg.n_runs, resolve_threads(cfg.threads), [&](int run) {
    SvarSpec spec;
    std::vector<std::vector<char>> inst_anc;     // [k][j]
    std::vector<std::vector<char>> summary_anc;  // [k][j]
    std::vector<std::vector<char>> closure_pair; // hardest lagged class
    try {
      spec = random_setup(setup_seed(cfg.master_seed, run), cfg.d, cfg.p);
      inst_anc = support_closure(b0_support(spec));

      std::vector<std::vector<char>> union_adj(cfg.d, std::vector<char>(cfg.d, 0));
      for (int tau = 0; tau <= cfg.p; ++tau) {
        for (int j = 0; j < cfg.d; ++j) {
          for (int k = 0; k < cfg.d; ++k) {
            if (std::abs(spec.B[tau](j, k)) > kZeroTol) union_adj[k][j] = 1;
          }
        }
      }
      summary_anc = support_closure(union_adj);

      closure_pair.assign(cfg.d, std::vector<char>(cfg.d, 0));
      for (int j = 0; j < cfg.d; ++j) {
        const GroundTruth gt = classify_ancestors(spec, j, cfg.p);
        for (int k = 0; k < cfg.d; ++k) {
          if (k != j && gt.at(k, 1) == AncestorClass::LaggedInstantaneousStart) {
            closure_pair[k][j] = 1;
          }
        }
      }
    } catch (const std::exception&) {
      for (auto& cell : cells[run]) cell.failed = true;
      return;
    }

    for (int ti = 0; ti < n_t; ++ti) {
      GraphCell& cell = cells[run][ti];
      try {
        const TimeSeries x = simulate(spec, cfg.T_grid[ti], cfg.burn_in,
                                      mix_seed(mix_seed(cfg.master_seed, kSimSalt, run), ti));
        const EdgePValueTensor tensor =
            all_pairs_tests(x, cfg.p, cfg.exponent);
        const AncestralGraph g_inst =
            instantaneous_graph(tensor, x.names, cfg.alpha);
        const AncestralGraph g_sum = summary_graph(tensor, x.names, cfg.alpha);

        std::vector<std::vector<char>> inst_edge(cfg.d, std::vector<char>(cfg.d, 0));
        for (const auto& e : g_inst.edges) inst_edge[e.from][e.to] = 1;
        std::vector<std::vector<char>> sum_edge(cfg.d, std::vector<char>(cfg.d, 0));
        for (const auto& e : g_sum.edges) sum_edge[e.from][e.to] = 1;

        cell.inst_acyclic = topological_order(cfg.d, g_inst.edges).has_value();
        for (int k = 0; k < cfg.d; ++k) {
          for (int j = 0; j < cfg.d; ++j) {
            if (k == j) continue;
            if (inst_anc[k][j]) {
              ++cell.inst_pairs;
              if (inst_edge[k][j]) ++cell.inst_detected;
            } else if (inst_edge[k][j]) {
              cell.inst_false = true;
            }
            if (summary_anc[k][j]) {
              ++cell.summary_pairs;
              if (sum_edge[k][j]) ++cell.summary_detected;
            } else if (sum_edge[k][j]) {
              cell.summary_false = true;
            }
            if (closure_pair[k][j]) {
              ++cell.closure_pairs;
              if (sum_edge[k][j]) ++cell.closure_detected;
            }
          }
        }
      } catch (const std::exception&) {
        cell.failed = true;
      }
    }
  });

  GraphBenchReport report;
  report.config = cfg;
  report.rows.resize(n_t);
  for (int ti = 0; ti < n_t; ++ti) {
    GraphBenchRow& row = report.rows[ti];
    row.T = cfg.T_grid[ti];
    for (int run = 0; run < cfg.n_runs; ++run) {
      const GraphCell& cell = cells[run][ti];
      if (cell.failed) {
        ++row.runs_failed;
        continue;
      }
      ++row.runs_used;
      if (cell.inst_false) ++row.inst_false_positive_runs;
      if (cell.summary_false) ++row.summary_false_positive_runs;
      if (cell.inst_acyclic) ++row.inst_acyclic_runs;
      row.inst_pairs += cell.inst_pairs;
      row.inst_detected += cell.inst_detected;
      row.summary_pairs += cell.summary_pairs;
      row.summary_detected += cell.summary_detected;
      row.closure_pairs += cell.closure_pairs;
      row.closure_detected += cell.closure_detected;
    }
  }
  return report;
}

namespace {

nlohmann::json config_json(const BenchConfig& cfg) {
  return nlohmann::json{{"d", cfg.d},
                        {"p", cfg.p},
                        {"runs", cfg.n_runs},
                        {"T_grid", cfg.T_grid},
                        {"alpha", cfg.alpha},
                        {"exponent", cfg.exponent},
                        {"target", cfg.target + 1},
                        {"master_seed", cfg.master_seed},
                        {"burn_in", cfg.burn_in}};
}

}  // namespace

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json classes;
    for (int ci = 0; ci < kNumAncestorClasses; ++ci) {
      const auto& stats = row.per_class[ci];
      classes[to_string(static_cast<AncestorClass>(ci))] =
          nlohmann::json{{"pairs", stats.pairs},
                         {"detected", stats.detected},
                         {"detection_rate", stats.detection_rate()},
                         {"mean_abs_z", stats.mean_abs_z()}};
    }
    rows.push_back(nlohmann::json{{"T", row.T},
                                  {"runs_used", row.runs_used},
                                  {"runs_failed", row.runs_failed},
                                  {"fwer", row.fwer()},
                                  {"fwer_se", row.fwer_se()},
                                  {"classes", std::move(classes)}});
  }
  return nlohmann::json{{"kind", "nodewise"},
                        {"config", config_json(report.config)},
                        {"rows", std::move(rows)}};
}

nlohmann::json to_json(const GraphBenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back(nlohmann::json{
        {"T", row.T},
        {"runs_used", row.runs_used},
        {"runs_failed", row.runs_failed},
        {"instantaneous",
         {{"fwer", row.inst_fwer()},
          {"detection_rate", row.inst_detection_rate()},
          {"acyclic_fraction", row.acyclic_fraction()}}},
        {"summary",
         {{"fwer", row.summary_fwer()},
          {"detection_rate", row.summary_detection_rate()}}},
        {"closure", {{"recovery_rate", row.closure_recovery_rate()},
                     {"pairs", row.closure_pairs}}}});
  }
  return nlohmann::json{{"kind", "graphs"},
                        {"config", config_json(report.config)},
                        {"rows", std::move(rows)}};
}

namespace {

void csv_line(std::ostringstream& out, Eigen::Index T, const std::string& cls,
              const std::string& metric, double value) {
  out << T << ',' << cls << ',' << metric << ',';
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  out << buf << '\n';
}

}  // namespace

std::string to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "T,class,metric,value\n";
  for (const auto& row : report.rows) {
    csv_line(out, row.T, "all", "fwer", row.fwer());
    csv_line(out, row.T, "all", "fwer_se", row.fwer_se());
    csv_line(out, row.T, "all", "runs_used", row.runs_used);
    csv_line(out, row.T, "all", "runs_failed", row.runs_failed);
    for (int ci = 0; ci < kNumAncestorClasses; ++ci) {
      const auto& stats = row.per_class[ci];
      const std::string cls = to_string(static_cast<AncestorClass>(ci));
      csv_line(out, row.T, cls, "pairs", static_cast<double>(stats.pairs));
      csv_line(out, row.T, cls, "detection_rate", stats.detection_rate());
      csv_line(out, row.T, cls, "mean_abs_z", stats.mean_abs_z());
    }
  }
  return out.str();
}

std::string to_csv(const GraphBenchReport& report) {
  std::ostringstream out;
  out << "T,class,metric,value\n";
  for (const auto& row : report.rows) {
    csv_line(out, row.T, "all", "runs_used", row.runs_used);
    csv_line(out, row.T, "all", "runs_failed", row.runs_failed);
    csv_line(out, row.T, "instantaneous", "fwer", row.inst_fwer());
    csv_line(out, row.T, "instantaneous", "detection_rate", row.inst_detection_rate());
    csv_line(out, row.T, "instantaneous", "acyclic_fraction", row.acyclic_fraction());
    csv_line(out, row.T, "summary", "fwer", row.summary_fwer());
    csv_line(out, row.T, "summary", "detection_rate", row.summary_detection_rate());
    csv_line(out, row.T, "closure", "recovery_rate", row.closure_recovery_rate());
    csv_line(out, row.T, "closure", "pairs", static_cast<double>(row.closure_pairs));
  }
  return out.str();
}

}  // namespace ancestry
