#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "propgraph/encoding.hpp"
#include "propgraph/graph.hpp"

namespace propgraph {

/// Walk and transition hyper-parameters. Defaults: lambda 0.5, damping 0.85,
/// temperature 0.1, cosine threshold 0.4.
struct WalkParams {
  double lambda = 0.5;
  double damping = 0.85;
  double tau = 0.1;
  double theta = 0.4;
  double ppr_epsilon = 1e-8;
  int ppr_max_iters = 200;

  /// Throws InvalidArgument when a field is out of its domain.
  void validate() const;
};

/// Square sparse matrix in compressed-row form with ascending column indices
/// inside each row. Rows are either empty (dangling) or sum to one.
class TransitionMatrix {
 public:
  using Row = std::vector<std::pair<std::uint32_t, double>>;

  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t n);
  /// Builds from per-row entries; entries must have ascending, unique columns.
  static TransitionMatrix from_rows(const std::vector<Row>& rows);

  std::size_t size() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> row_columns(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  bool is_dangling(std::size_t i) const noexcept { return row_ptr_[i] == row_ptr_[i + 1]; }

  /// Entry (i, j); zero when absent.
  double at(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
  std::vector<std::vector<double>> dense() const;

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

/// Stationary probabilities indexed like the matrix rows.
using StationaryDistribution = std::vector<double>;

/// A node subset of the heterogeneous graph with its induced edges. Local
/// proposition index i refers to propositions()[i].
class Subgraph {
 public:
  Subgraph() = default;
  /// `nodes` need not be sorted or unique.
  explicit Subgraph(std::vector<NodeId> nodes);
  static Subgraph whole(const HeteroGraph& graph);

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<std::uint32_t>& propositions() const noexcept { return props_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId id) const noexcept;
  std::optional<std::size_t> local_proposition(std::uint32_t global) const noexcept;
  std::vector<std::pair<NodeId, NodeId>> induced_edges(const HeteroGraph& graph) const;

 private:
  std::vector<NodeId> nodes_;
  std::vector<std::uint32_t> props_;
};

/// Uniform random-walk operator over every node of a finalized graph (flat
/// numbering), built once and shared by all subgraph extractions.
class GraphIndex {
 public:
  explicit GraphIndex(const HeteroGraph& graph);

  const HeteroGraph& graph() const noexcept { return *graph_; }
  const TransitionMatrix& walk() const noexcept { return walk_; }

 private:
  const HeteroGraph* graph_;
  TransitionMatrix walk_;
};

/// T_s = A(p -> eP) * A(eP -> p) restricted to the propositions of `sub`, each
/// adjacency row-normalized by the degree inside `sub`. The diagonal is zeroed
/// and non-empty rows are renormalized to one.
TransitionMatrix build_structural_transition(const HeteroGraph& graph, const Subgraph& sub);
TransitionMatrix build_structural_transition(const HeteroGraph& graph);

/// T_n(i, j) proportional to exp(c_j / tau) over the support of row i of T_s,
/// with c_j < theta weighted zero. A row whose weights all vanish copies the T_s
/// row; such rows are reported through `fallback_rows` when given.
TransitionMatrix build_semantic_transition(const TransitionMatrix& structural,
                                           std::span<const double> similarities,
                                           const WalkParams& params,
                                           std::vector<bool>* fallback_rows = nullptr);

/// lambda * T_s + (1 - lambda) * T_n.
TransitionMatrix blend(const TransitionMatrix& structural, const TransitionMatrix& semantic,
                       double lambda);

/// Cosine of `query` with every proposition of `sub`, in local order.
std::vector<double> query_similarities(const HeteroGraph& graph, const Subgraph& sub,
                                       EmbeddingView query);

/// Query-aware operator M on `sub` given a precomputed T_s.
TransitionMatrix query_aware_transition(const HeteroGraph& graph, const Subgraph& sub,
                                        const TransitionMatrix& structural, EmbeddingView query,
                                        const WalkParams& params);

/// Personalized PageRank: fixed point of pi = d * M^T pi + (1 - d) * r with r
/// uniform over the distinct seeds. Mass on dangling rows returns to r. Stops
/// when the L1 change drops below ppr_epsilon or after ppr_max_iters sweeps.
StationaryDistribution ppr(const TransitionMatrix& m, std::span<const std::uint32_t> seeds,
                           const WalkParams& params);

/// Random walk with restart from the seed propositions over the whole graph.
/// Non-seed nodes are ranked by visit probability divided by degree, ties by
/// flat index, and added until the subgraph holds `target_size` nodes. Seeds,
/// their passages, and the passage of every admitted proposition are always
/// included. Unreachable nodes are never admitted.
Subgraph extract_subgraph(const GraphIndex& index, std::span<const std::uint32_t> seeds,
                          std::size_t target_size, const WalkParams& params);

}  // namespace propgraph
