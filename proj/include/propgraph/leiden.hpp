#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace propgraph {

/// Undirected weighted graph for community detection. Each edge is stored in
/// both endpoint lists; a self-loop appears once in its node's list.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n = 0) : adj_(n) {}

  struct Edge {
    std::size_t u;
    std::size_t v;
    double w;
  };
  /// Parallel edges are merged by summing their weights.
  static WeightedGraph from_edges(std::size_t n, std::vector<Edge> edges);

  /// Merges with an existing (u, v) edge when present.
  void add_edge(std::size_t u, std::size_t v, double w = 1.0);

  std::size_t size() const noexcept { return adj_.size(); }
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t v) const {
    return adj_[v];
  }
  /// Weighted degree; a self-loop counts twice.
  double degree(std::size_t v) const;
  double total_weight() const;  // sum of edge weights, each edge once

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
};

/// Newman-Girvan modularity with resolution `gamma` of `membership`.
double modularity(const WeightedGraph& g, const std::vector<std::size_t>& membership,
                  double gamma = 1.0);

struct LeidenOptions {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  /// Upper bound on move/refine/aggregate rounds.
  std::size_t max_rounds = 32;
};

/// One Leiden run (local moving, refinement, aggregation until stable). Returns
/// community labels numbered 0.. in order of each community's smallest node.
std::vector<std::size_t> leiden(const WeightedGraph& g, const LeidenOptions& options = {});

/// Level 0 is leiden() on the whole graph. Level l+1 re-runs leiden() inside
/// every level-l community with more than `max_size` nodes; communities that are
/// small enough or cannot be split are carried over unchanged, so every level
/// partitions all nodes. Stops when a level changes nothing.
std::vector<std::vector<std::size_t>> hierarchical_leiden(const WeightedGraph& g,
                                                          std::size_t max_size,
                                                          const LeidenOptions& options = {},
                                                          std::size_t max_levels = 8);

}  // namespace propgraph
