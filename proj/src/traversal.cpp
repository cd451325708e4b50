#include "propgraph/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "propgraph/error.hpp"

namespace propgraph {

void WalkParams::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(lambda >= 0.0 && lambda <= 1.0)) bad("lambda must lie in [0, 1]");
  if (!(damping > 0.0 && damping < 1.0)) bad("damping must lie in (0, 1)");
  if (!(tau > 0.0)) bad("temperature must be positive");
  if (!(theta >= -1.0 && theta <= 1.0)) bad("cosine threshold must lie in [-1, 1]");
  if (!(ppr_epsilon > 0.0)) bad("ppr_epsilon must be positive");
  if (ppr_max_iters < 1) bad("ppr_max_iters must be >= 1");
}

// ---------------------------------------------------------------------------
// TransitionMatrix

TransitionMatrix::TransitionMatrix(std::size_t n) : row_ptr_(n + 1, 0) {}

TransitionMatrix TransitionMatrix::from_rows(const std::vector<Row>& rows) {
  TransitionMatrix m;
  m.row_ptr_.assign(1, 0);
  m.row_ptr_.reserve(rows.size() + 1);
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  m.cols_.reserve(nnz);
  m.vals_.reserve(nnz);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k].first >= rows.size() || (k > 0 && r[k].first <= r[k - 1].first)) {
        throw Error(ErrorCode::InvalidArgument, "row entries must have ascending in-range columns");
      }
      m.cols_.push_back(r[k].first);
      m.vals_.push_back(r[k].second);
    }
    m.row_ptr_.push_back(m.cols_.size());
  }
  return m;
}

double TransitionMatrix::at(std::size_t i, std::size_t j) const {
  const auto cols = row_columns(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
  if (it == cols.end() || *it != j) return 0.0;
  return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

double TransitionMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (double v : row_values(i)) s += v;
  return s;
}

std::vector<std::vector<double>> TransitionMatrix::dense() const {
  std::vector<std::vector<double>> d(size(), std::vector<double>(size(), 0.0));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto cols = row_columns(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) d[i][cols[k]] = vals[k];
  }
  return d;
}

// ---------------------------------------------------------------------------
// Subgraph

Subgraph::Subgraph(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (const NodeId n : nodes_) {
    if (n.kind == NodeKind::Proposition) props_.push_back(n.index);
  }
}

Subgraph Subgraph::whole(const HeteroGraph& graph) {
  std::vector<NodeId> nodes;
  nodes.reserve(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) nodes.push_back(graph.node_at(i));
  return Subgraph(std::move(nodes));
}

bool Subgraph::contains(NodeId id) const noexcept {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

std::optional<std::size_t> Subgraph::local_proposition(std::uint32_t global) const noexcept {
  const auto it = std::lower_bound(props_.begin(), props_.end(), global);
  if (it == props_.end() || *it != global) return std::nullopt;
  return static_cast<std::size_t>(it - props_.begin());
}

std::vector<std::pair<NodeId, NodeId>> Subgraph::induced_edges(const HeteroGraph& graph) const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const std::uint32_t p : props_) {
    for (const NodeId n : graph.neighbors(NodeId::proposition(p))) {
      if (contains(n)) out.emplace_back(NodeId::proposition(p), n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// GraphIndex

GraphIndex::GraphIndex(const HeteroGraph& graph) : graph_(&graph) {
  std::vector<TransitionMatrix::Row> rows(graph.node_count());
  for (std::size_t v = 0; v < rows.size(); ++v) {
    const auto nbrs = graph.neighbors(graph.node_at(v));
    if (nbrs.empty()) continue;
    const double w = 1.0 / static_cast<double>(nbrs.size());
    rows[v].reserve(nbrs.size());
    // neighbors are sorted by (kind, index), which is also flat order
    for (const NodeId n : nbrs) rows[v].emplace_back(static_cast<std::uint32_t>(graph.flat_index(n)), w);
  }
  walk_ = TransitionMatrix::from_rows(rows);
}

// ---------------------------------------------------------------------------
// Transitions

namespace {

/// Sparse row accumulator with reset cost proportional to the touched entries.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t n) : values_(n, 0.0), touched_flag_(n, false) {}

  void add(std::uint32_t j, double v) {
    if (!touched_flag_[j]) {
      touched_flag_[j] = true;
      touched_.push_back(j);
    }
    values_[j] += v;
  }

  /// Emits the accumulated row sorted by column, skipping `skip`, and resets.
  TransitionMatrix::Row take(std::uint32_t skip) {
    std::sort(touched_.begin(), touched_.end());
    TransitionMatrix::Row row;
    row.reserve(touched_.size());
    for (const auto j : touched_) {
      if (j != skip && values_[j] > 0.0) row.emplace_back(j, values_[j]);
      values_[j] = 0.0;
      touched_flag_[j] = false;
    }
    touched_.clear();
    return row;
  }

 private:
  std::vector<double> values_;
  std::vector<bool> touched_flag_;
  std::vector<std::uint32_t> touched_;
};

void normalize_row(TransitionMatrix::Row& row) {
  double sum = 0.0;
  for (const auto& [j, v] : row) sum += v;
  if (sum <= 0.0) {
    row.clear();
    return;
  }
  for (auto& [j, v] : row) v /= sum;
}

}  // namespace

TransitionMatrix build_structural_transition(const HeteroGraph& graph, const Subgraph& sub) {
  const auto& props = sub.propositions();
  const std::size_t n = props.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "structural transition over zero propositions");

  // The (entity u passage) side: for each hub node present in the subgraph, the
  // local indices of its propositions that are also present.
  std::unordered_map<std::size_t, std::vector<std::uint32_t>> hub_props;
  const auto local_members = [&](NodeId hub) -> const std::vector<std::uint32_t>& {
    const std::size_t key = graph.flat_index(hub);
    auto [it, inserted] = hub_props.try_emplace(key);
    if (inserted) {
      const auto incident = hub.kind == NodeKind::Passage ? graph.passage_propositions(hub.index)
                                                          : graph.entity_propositions(hub.index);
      for (const auto p : incident) {
        if (const auto local = sub.local_proposition(p)) {
          it->second.push_back(static_cast<std::uint32_t>(*local));
        }
      }
    }
    return it->second;
  };

  std::vector<TransitionMatrix::Row> rows(n);
  RowAccumulator acc(n);
  std::vector<NodeId> hubs;
  for (std::size_t i = 0; i < n; ++i) {
    hubs.clear();
    const auto& rec = graph.proposition(props[i]);
    if (sub.contains(rec.passage)) hubs.push_back(rec.passage);
    for (const NodeId e : rec.entity_refs) {
      if (sub.contains(e)) hubs.push_back(e);
    }
    if (hubs.empty()) continue;
    const double out_weight = 1.0 / static_cast<double>(hubs.size());
    for (const NodeId hub : hubs) {
      const auto& members = local_members(hub);
      const double back_weight = 1.0 / static_cast<double>(members.size());
      for (const auto k : members) acc.add(k, out_weight * back_weight);
    }
    rows[i] = acc.take(static_cast<std::uint32_t>(i));
    normalize_row(rows[i]);
  }
  return TransitionMatrix::from_rows(rows);
}

TransitionMatrix build_structural_transition(const HeteroGraph& graph) {
  return build_structural_transition(graph, Subgraph::whole(graph));
}

TransitionMatrix build_semantic_transition(const TransitionMatrix& structural,
                                           std::span<const double> similarities,
                                           const WalkParams& params,
                                           std::vector<bool>* fallback_rows) {
  if (!(params.tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const std::size_t n = structural.size();
  if (similarities.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "similarity vector does not match matrix size");
  }
  if (fallback_rows) fallback_rows->assign(n, false);

  std::vector<TransitionMatrix::Row> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = structural.row_columns(i);
    const auto vals = structural.row_values(i);
    // Shift by the largest admitted similarity so exp() cannot overflow; the
    // common factor cancels in the normalization.
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i || vals[k] <= 0.0) continue;
      const double c = similarities[cols[k]];
      if (c >= params.theta) shift = std::max(shift, c);
    }
    auto& row = rows[i];
    if (std::isfinite(shift)) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] == i || vals[k] <= 0.0) continue;
        const double c = similarities[cols[k]];
        if (c < params.theta) continue;
        const double w = std::exp((c - shift) / params.tau);
        if (w > 0.0) row.emplace_back(cols[k], w);
      }
      normalize_row(row);
    }
    if (row.empty() && !cols.empty()) {
      for (std::size_t k = 0; k < cols.size(); ++k) row.emplace_back(cols[k], vals[k]);
      if (fallback_rows) (*fallback_rows)[i] = true;
    }
  }
  return TransitionMatrix::from_rows(rows);
}

TransitionMatrix blend(const TransitionMatrix& structural, const TransitionMatrix& semantic,
                       double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must lie in [0, 1]");
  }
  if (structural.size() != semantic.size()) {
    throw Error(ErrorCode::DimensionMismatch, "blend of differently sized matrices");
  }
  const double mu = 1.0 - lambda;
  std::vector<TransitionMatrix::Row> rows(structural.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ac = structural.row_columns(i);
    const auto av = structural.row_values(i);
    const auto bc = semantic.row_columns(i);
    const auto bv = semantic.row_values(i);
    std::size_t a = 0;
    std::size_t b = 0;
    auto& row = rows[i];
    while (a < ac.size() || b < bc.size()) {
      std::uint32_t j;
      double v;
      if (b == bc.size() || (a < ac.size() && ac[a] < bc[b])) {
        j = ac[a];
        v = lambda * av[a++];
      } else if (a == ac.size() || bc[b] < ac[a]) {
        j = bc[b];
        v = mu * bv[b++];
      } else {
        j = ac[a];
        v = lambda * av[a++] + mu * bv[b++];
      }
      if (v > 0.0) row.emplace_back(j, v);
    }
  }
  return TransitionMatrix::from_rows(rows);
}

std::vector<double> query_similarities(const HeteroGraph& graph, const Subgraph& sub,
                                       EmbeddingView query) {
  std::vector<double> c;
  c.reserve(sub.propositions().size());
  for (const auto p : sub.propositions()) c.push_back(cosine(query, graph.proposition_embedding(p)));
  return c;
}

TransitionMatrix query_aware_transition(const HeteroGraph& graph, const Subgraph& sub,
                                        const TransitionMatrix& structural, EmbeddingView query,
                                        const WalkParams& params) {
  const auto c = query_similarities(graph, sub, query);
  const auto semantic = build_semantic_transition(structural, c, params);
  return blend(structural, semantic, params.lambda);
}

// ---------------------------------------------------------------------------
// PPR

StationaryDistribution ppr(const TransitionMatrix& m, std::span<const std::uint32_t> seeds,
                           const WalkParams& params) {
  const std::size_t n = m.size();
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "PPR needs at least one seed");
  if (!(params.damping > 0.0 && params.damping < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1)");
  }

  std::vector<std::uint32_t> distinct(seeds.begin(), seeds.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.back() >= n) throw Error(ErrorCode::InvalidArgument, "PPR seed out of range");

  const double restart_mass = 1.0 / static_cast<double>(distinct.size());
  const double d = params.damping;

  StationaryDistribution pi(n, 0.0);
  for (const auto s : distinct) pi[s] = restart_mass;
  StationaryDistribution next(n, 0.0);

  for (int iter = 0; iter < params.ppr_max_iters; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pi[i] == 0.0) continue;
      if (m.is_dangling(i)) {
        dangling += pi[i];
        continue;
      }
      const auto cols = m.row_columns(i);
      const auto vals = m.row_values(i);
      const double mass = d * pi[i];
      for (std::size_t k = 0; k < cols.size(); ++k) next[cols[k]] += mass * vals[k];
    }
    const double restart = ((1.0 - d) + d * dangling) * restart_mass;
    for (const auto s : distinct) next[s] += restart;

    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (change < params.ppr_epsilon) break;
  }
  return pi;
}

// ---------------------------------------------------------------------------
// GExtract

Subgraph extract_subgraph(const GraphIndex& index, std::span<const std::uint32_t> seeds,
                          std::size_t target_size, const WalkParams& params) {
  const HeteroGraph& graph = index.graph();
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "subgraph extraction needs seeds");

  std::vector<bool> chosen(graph.node_count(), false);
  std::vector<NodeId> nodes;
  const auto admit = [&](NodeId id) {
    const auto f = graph.flat_index(id);
    if (chosen[f]) return;
    chosen[f] = true;
    nodes.push_back(id);
  };

  std::vector<std::uint32_t> flat_seeds;
  for (const auto s : seeds) {
    if (s >= graph.proposition_count()) {
      throw Error(ErrorCode::UnknownNode, "seed proposition " + std::to_string(s));
    }
    admit(NodeId::proposition(s));
    admit(graph.proposition(s).passage);
    flat_seeds.push_back(static_cast<std::uint32_t>(graph.flat_index(NodeId::proposition(s))));
  }
  if (nodes.size() >= target_size) return Subgraph(std::move(nodes));

  const auto visits = ppr(index.walk(), flat_seeds, params);

  struct Ranked {
    double score;
    std::size_t flat;
  };
  std::vector<Ranked> ranked;
  for (std::size_t f = 0; f < visits.size(); ++f) {
    if (chosen[f] || visits[f] <= 0.0) continue;
    const auto deg = graph.degree(graph.node_at(f));
    ranked.push_back({visits[f] / static_cast<double>(deg), f});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.score != b.score ? a.score > b.score : a.flat < b.flat;
  });

  for (const auto& r : ranked) {
    if (nodes.size() >= target_size) break;
    if (chosen[r.flat]) continue;
    const NodeId id = graph.node_at(r.flat);
    if (id.kind == NodeKind::Proposition) {
      const NodeId passage = graph.proposition(id.index).passage;
      const bool needs_passage = !chosen[graph.flat_index(passage)];
      if (nodes.size() + (needs_passage ? 2 : 1) > target_size) continue;
      admit(id);
      admit(passage);
    } else {
      admit(id);
    }
  }
  return Subgraph(std::move(nodes));
}

}  // namespace propgraph
