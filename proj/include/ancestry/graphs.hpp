#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ancestry/ancestor.hpp"

namespace ancestry {

enum class Provenance { Tested, InferredByClosure };
enum class LagScope { Instantaneous, Summary };

struct GraphEdge {
  int from = 0;
  int to = 0;
  std::optional<double> p;  // corrected p-value; absent on inferred edges
  Provenance provenance = Provenance::Tested;
};

struct AncestralGraph {
  int d = 0;
  std::vector<std::string> names;
  LagScope scope = LagScope::Instantaneous;
  std::vector<GraphEdge> edges;
  // Largest corrected p-value removed during cycle resolution; doubles as a
  // model-check p-value. Absent when no cycle ever formed.
  std::optional<double> violation_alpha;

  bool has_edge(int from, int to) const;
};

// Component id per node (Kosaraju two-pass).
std::vector<int> strongly_connected_components(int d, const std::vector<GraphEdge>& edges);

// Topological order, or nullopt when the edge set is cyclic.
std::optional<std::vector<int>> topological_order(int d, const std::vector<GraphEdge>& edges);

// Reachability closure. Existing edges are kept untouched; new edges carry
// the inferred-by-closure tag. Self-loops are never emitted, so cyclic
// inputs are fine.
std::vector<GraphEdge> transitive_closure(int d, std::vector<GraphEdge> edges);

struct CycleResolution {
  std::vector<GraphEdge> kept;
  std::vector<GraphEdge> removed;
  std::optional<double> violation_alpha;
};

// Repeatedly drops the largest-p edge that lies inside a nontrivial strongly
// connected component until the tested graph is acyclic. Ties break by
// (source, target) order. Edges outside every cycle are never touched.
CycleResolution resolve_cycles(int d, std::vector<GraphEdge> tested);

// Thresholds Holm-corrected instantaneous p-values at alpha, resolves cycles,
// and closes transitively. The result is always a DAG.
AncestralGraph instantaneous_graph(const EdgePValueTensor& tensor,
                                   std::vector<std::string> names, double alpha);
AncestralGraph instantaneous_graph(const TimeSeries& x, int p, double alpha,
                                   double exponent = kDefaultExponent,
                                   bool center = true,
                                   double rank_tol = kDefaultRankTol);

// Per-pair combination of the p + 1 lag p-values; diagonal entries are NaN.
Eigen::MatrixXd summary_pvalues(const EdgePValueTensor& tensor);

// Combines lag p-values per pair, Holm-corrects, thresholds at alpha, and
// closes transitively. No cycle resolution; the output may be cyclic.
AncestralGraph summary_graph(const EdgePValueTensor& tensor,
                             std::vector<std::string> names, double alpha);
AncestralGraph summary_graph(const TimeSeries& x, int p, double alpha,
                             double exponent = kDefaultExponent, bool center = true,
                             double rank_tol = kDefaultRankTol);

// Shared tail of both pipelines: keeps edges with corrected p <= alpha from a
// d x d matrix (diagonal ignored), resolves cycles when asked, then closes.
AncestralGraph graph_from_corrected(const Eigen::MatrixXd& corrected,
                                    std::vector<std::string> names, double alpha,
                                    LagScope scope);

std::string to_dot(const AncestralGraph& graph);
nlohmann::json to_json(const AncestralGraph& graph);

}  // namespace ancestry
