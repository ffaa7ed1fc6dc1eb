#include "ancestry/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

#include "ancestry/multiplicity.hpp"

namespace ancestry {

namespace {

std::vector<std::vector<int>> adjacency(int d, const std::vector<GraphEdge>& edges) {
  std::vector<std::vector<int>> adj(d);
  for (const auto& e : edges) adj[e.from].push_back(e.to);
  return adj;
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", p);
  return buf;
}

std::vector<std::string> default_names(int d, std::vector<std::string> names) {
  if (names.empty()) {
    for (int k = 0; k < d; ++k) names.push_back("x" + std::to_string(k + 1));
  }
  if (static_cast<int>(names.size()) != d) {
    throw std::invalid_argument("graph name count does not match node count");
  }
  return names;
}

}  // namespace

bool AncestralGraph::has_edge(int from, int to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const GraphEdge& e) {
    return e.from == from && e.to == to;
  });
}

std::vector<int> strongly_connected_components(int d, const std::vector<GraphEdge>& edges) {
  const auto fwd = adjacency(d, edges);
  std::vector<std::vector<int>> rev(d);
  for (const auto& e : edges) rev[e.to].push_back(e.from);

  std::vector<char> seen(d, 0);
  std::vector<int> order;
  order.reserve(d);
  auto dfs1 = [&](auto& self, int v) -> void {
    seen[v] = 1;
    for (int to : fwd[v]) {
      if (!seen[to]) self(self, to);
    }
    order.push_back(v);
  };
  for (int v = 0; v < d; ++v) {
    if (!seen[v]) dfs1(dfs1, v);
  }

  std::vector<int> comp(d, -1);
  int current = 0;
  auto dfs2 = [&](auto& self, int v) -> void {
    comp[v] = current;
    for (int to : rev[v]) {
      if (comp[to] == -1) self(self, to);
    }
  };
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] == -1) {
      dfs2(dfs2, *it);
      ++current;
    }
  }
  return comp;
}

std::optional<std::vector<int>> topological_order(int d, const std::vector<GraphEdge>& edges) {
  std::vector<int> indegree(d, 0);
  const auto adj = adjacency(d, edges);
  for (const auto& e : edges) ++indegree[e.to];

  std::deque<int> ready;
  for (int v = 0; v < d; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (int to : adj[v]) {
      if (--indegree[to] == 0) ready.push_back(to);
    }
  }
  if (static_cast<int>(order.size()) != d) return std::nullopt;
  return order;
}

std::vector<GraphEdge> transitive_closure(int d, std::vector<GraphEdge> edges) {
  const auto adj = adjacency(d, edges);
  std::vector<std::vector<char>> reach(d, std::vector<char>(d, 0));
  for (int start = 0; start < d; ++start) {
    std::deque<int> queue{start};
    std::vector<char> seen(d, 0);
    seen[start] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int to : adj[v]) {
        if (!seen[to]) {
          seen[to] = 1;
          reach[start][to] = 1;
          queue.push_back(to);
        }
      }
    }
    // A node reaching itself around a cycle stays excluded: no self-loops.
    reach[start][start] = 0;
  }

  std::vector<std::vector<char>> present(d, std::vector<char>(d, 0));
  for (const auto& e : edges) present[e.from][e.to] = 1;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (a != b && reach[a][b] && !present[a][b]) {
        edges.push_back({a, b, std::nullopt, Provenance::InferredByClosure});
      }
    }
  }
  return edges;
}

CycleResolution resolve_cycles(int d, std::vector<GraphEdge> tested) {
  CycleResolution out;
  out.kept = std::move(tested);
  for (;;) {
    const std::vector<int> comp = strongly_connected_components(d, out.kept);
    std::vector<int> comp_size(d, 0);
    for (int v = 0; v < d; ++v) ++comp_size[comp[v]];

    int victim = -1;
    for (std::size_t i = 0; i < out.kept.size(); ++i) {
      const auto& e = out.kept[i];
      if (comp[e.from] != comp[e.to] || comp_size[comp[e.from]] < 2) continue;
      if (!e.p.has_value()) {
        throw std::invalid_argument("cycle resolution needs p-values on tested edges");
      }
      if (victim < 0) {
        victim = static_cast<int>(i);
        continue;
      }
      const auto& best = out.kept[victim];
      const bool larger = *e.p > *best.p;
      const bool tie_first = *e.p == *best.p &&
                             std::pair{e.from, e.to} < std::pair{best.from, best.to};
      if (larger || tie_first) victim = static_cast<int>(i);
    }
    if (victim < 0) break;
    out.removed.push_back(out.kept[victim]);
    out.kept.erase(out.kept.begin() + victim);
  }
  if (!out.removed.empty()) {
    double worst = 0.0;
    for (const auto& e : out.removed) worst = std::max(worst, *e.p);
    out.violation_alpha = worst;
  }
  return out;
}

AncestralGraph graph_from_corrected(const Eigen::MatrixXd& corrected,
                                    std::vector<std::string> names, double alpha,
                                    LagScope scope) {
  const int d = static_cast<int>(corrected.rows());
  if (corrected.cols() != d) {
    throw std::invalid_argument("corrected p-value matrix must be square");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }

  std::vector<GraphEdge> tested;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k == j) continue;
      const double p = corrected(k, j);
      if (std::isfinite(p) && p <= alpha) {
        tested.push_back({k, j, p, Provenance::Tested});
      }
    }
  }

  AncestralGraph graph;
  graph.d = d;
  graph.names = default_names(d, std::move(names));
  graph.scope = scope;
  if (scope == LagScope::Instantaneous) {
    CycleResolution res = resolve_cycles(d, std::move(tested));
    graph.violation_alpha = res.violation_alpha;
    graph.edges = transitive_closure(d, std::move(res.kept));
    if (!topological_order(d, graph.edges)) {
      throw std::logic_error("instantaneous graph is cyclic after resolution");
    }
  } else {
    graph.edges = transitive_closure(d, std::move(tested));
  }
  return graph;
}

AncestralGraph instantaneous_graph(const EdgePValueTensor& tensor,
                                   std::vector<std::string> names, double alpha) {
  const int d = tensor.d;
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(d) * (d - 1));
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k != j) raw.push_back(tensor.p_value(k, j, 0));
    }
  }
  const std::vector<double> corrected = holm(raw);

  Eigen::MatrixXd mat = Eigen::MatrixXd::Constant(
      d, d, std::numeric_limits<double>::quiet_NaN());
  std::size_t idx = 0;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k != j) mat(k, j) = corrected[idx++];
    }
  }
  return graph_from_corrected(mat, std::move(names), alpha, LagScope::Instantaneous);
}

AncestralGraph instantaneous_graph(const TimeSeries& x, int p, double alpha,
                                   double exponent, bool center, double rank_tol) {
  return instantaneous_graph(all_pairs_tests(x, p, exponent, center, rank_tol),
                             x.names, alpha);
}

Eigen::MatrixXd summary_pvalues(const EdgePValueTensor& tensor) {
  const int d = tensor.d;
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> lag_ps(tensor.p + 1);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k == j) continue;
      for (int tau = 0; tau <= tensor.p; ++tau) {
        lag_ps[tau] = tensor.p_value(k, j, tau);
      }
      out(k, j) = combine_lags(lag_ps);
    }
  }
  return out;
}

AncestralGraph summary_graph(const EdgePValueTensor& tensor,
                             std::vector<std::string> names, double alpha) {
  const int d = tensor.d;
  const Eigen::MatrixXd combined = summary_pvalues(tensor);
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(d) * (d - 1));
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k != j) raw.push_back(combined(k, j));
    }
  }
  const std::vector<double> corrected = holm(raw);

  Eigen::MatrixXd mat =
      Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
  std::size_t idx = 0;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (k != j) mat(k, j) = corrected[idx++];
    }
  }
  return graph_from_corrected(mat, std::move(names), alpha, LagScope::Summary);
}

AncestralGraph summary_graph(const TimeSeries& x, int p, double alpha, double exponent,
                             bool center, double rank_tol) {
  return summary_graph(all_pairs_tests(x, p, exponent, center, rank_tol), x.names,
                       alpha);
}

std::string to_dot(const AncestralGraph& graph) {
  std::string out = "digraph ancestral {\n";
  if (graph.violation_alpha) {
    out += "  label=\"violation_alpha = " + format_p(*graph.violation_alpha) + "\";\n";
  }
  for (const auto& name : graph.names) {
    out += "  \"" + name + "\";\n";
  }
  for (const auto& e : graph.edges) {
    out += "  \"" + graph.names[e.from] + "\" -> \"" + graph.names[e.to] + "\"";
    if (e.provenance == Provenance::InferredByClosure) {
      out += " [style=dashed, label=\"closure\"]";
    } else {
      out += " [label=\"p=" + format_p(e.p.value()) + "\"]";
    }
    out += ";\n";
  }
  out += "}\n";
  return out;
}

nlohmann::json to_json(const AncestralGraph& graph) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    nlohmann::json entry{{"from", graph.names[e.from]}, {"to", graph.names[e.to]}};
    if (e.p) {
      entry["p"] = *e.p;
    } else {
      entry["p"] = nullptr;
    }
    entry["provenance"] =
        e.provenance == Provenance::Tested ? "tested" : "inferred-by-closure";
    edges.push_back(std::move(entry));
  }
  nlohmann::json out{{"nodes", graph.names},
                     {"edges", std::move(edges)},
                     {"scope", graph.scope == LagScope::Instantaneous
                                   ? "instantaneous"
                                   : "summary"}};
  if (graph.violation_alpha) {
    out["violation_alpha"] = *graph.violation_alpha;
  } else {
    out["violation_alpha"] = nullptr;
  }
  return out;
}

}  // namespace ancestry
