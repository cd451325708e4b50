#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "propgraph/encoding.hpp"
#include "propgraph/graph.hpp"
#include "propgraph/llm.hpp"
#include "propgraph/traversal.hpp"

namespace propgraph {

using PropositionIds = std::vector<std::uint32_t>;
using ExclusionSet = std::unordered_set<std::uint32_t>;

enum class Round { Seed, Walk };

struct Provenance {
  Round round = Round::Seed;
  std::size_t iteration = 0;
  std::size_t query_index = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Insertion-ordered, duplicate-free set of proposition ids. The provenance of
/// an id is the one recorded when it was first inserted.
class PropositionPool {
 public:
  /// False (and no change) when `id` is already present.
  bool insert(std::uint32_t id, Provenance provenance);
  /// Inserts every id of `other` in its order; returns how many were new.
  std::size_t merge(const PropositionPool& other);

  bool contains(std::uint32_t id) const { return where_.contains(id); }
  const Provenance& provenance(std::uint32_t id) const { return provenance_[where_.at(id)]; }
  const PropositionIds& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  std::vector<std::string> texts(const HeteroGraph& graph) const;

 private:
  PropositionIds ids_;
  std::vector<Provenance> provenance_;
  std::unordered_map<std::uint32_t, std::size_t> where_;
};

struct SuggestConfig {
  std::size_t k = 20;
  std::size_t subgraph_size = 500;
  WalkParams walk;
  void validate() const;
};

/// Top-k propositions by cosine to the query; ignores edges.
PropositionIds suggest_naive(EmbeddingView query, const HeteroGraph& graph,
                             const SuggestConfig& cfg);

/// GExtract around the seeds, query-aware M on that subgraph, PPR restarted on
/// the seeds, top-k by probability. Seeds, `exclude` members and zero-probability
/// propositions are never returned; ties go to the lower proposition index.
PropositionIds suggest_local(EmbeddingView query, const GraphIndex& index,
                             std::span<const std::uint32_t> seeds, const SuggestConfig& cfg,
                             const ExclusionSet& exclude = {});

struct Walker {
  std::uint32_t proposition;
  Embedding query;
};

struct GlobalSuggestion {
  PropositionIds ids;
  /// For ids[i], the walker (index into the input) with the highest probability there.
  std::vector<std::size_t> best_walker;
};

/// One subgraph for the whole partition, one walk per member restarted at that
/// member with its own query; candidates are ranked by the summed probability.
GlobalSuggestion suggest_global(const std::vector<Walker>& walkers, const GraphIndex& index,
                                const SuggestConfig& cfg, const ExclusionSet& exclude = {});

struct Selection {
  PropositionIds kept;
  PropositionIds pruned;
};

/// Select verdict mapped back to ids; both lists keep candidate order.
Selection select(const std::string& query, const PropositionIds& candidates,
                 const HeteroGraph& graph, const LlmGateway& gateway);

}  // namespace propgraph
