#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "propgraph/encoding.hpp"

namespace propgraph {

enum class NodeKind : std::uint8_t { Passage = 0, Proposition = 1, Entity = 2 };

std::string_view to_string(NodeKind kind) noexcept;

/// (kind, index) with indices dense per kind. Ordered by kind, then index.
struct NodeId {
  NodeKind kind = NodeKind::Passage;
  std::uint32_t index = 0;

  static constexpr NodeId passage(std::uint32_t i) noexcept { return {NodeKind::Passage, i}; }
  static constexpr NodeId proposition(std::uint32_t i) noexcept {
    return {NodeKind::Proposition, i};
  }
  static constexpr NodeId entity(std::uint32_t i) noexcept { return {NodeKind::Entity, i}; }

  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// "psg:3", "prop:12", "ent:0".
std::string to_string(NodeId id);
NodeId parse_node_id(std::string_view tagged);

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct PassageRecord {
  NodeId id;
  std::string text;
  std::string source_doc;
  CharSpan span;
  friend bool operator==(const PassageRecord&, const PassageRecord&) = default;
};

struct PropositionRecord {
  NodeId id;
  std::string text;
  NodeId passage;
  std::vector<NodeId> entity_refs;
  friend bool operator==(const PropositionRecord&, const PropositionRecord&) = default;
};

struct EntityRecord {
  NodeId id;
  std::string canonical_name;
  std::vector<std::string> aliases;
  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct GraphCounts {
  std::size_t passages = 0;
  std::size_t propositions = 0;
  std::size_t entities = 0;
  std::size_t edges = 0;
  friend bool operator==(const GraphCounts&, const GraphCounts&) = default;
};

/// Passage / proposition / entity graph. Edges exist only between a proposition
/// and its passage, and between a proposition and the entities it mentions; both
/// are stored once on the proposition and exposed symmetrically.
///
/// The graph is mutable until finalize(); afterwards it is read-only and may be
/// shared between concurrent queries.
class HeteroGraph {
 public:
  NodeId add_passage(std::string text, std::string source_doc, CharSpan span);
  NodeId add_entity(std::string canonical_name, EmbeddingView embedding,
                    std::vector<std::string> aliases = {});
  /// Records an alias; no-op when already present.
  void add_alias(NodeId entity, const std::string& alias);
  /// Duplicate entities in `entities` collapse to a single edge.
  NodeId add_proposition(std::string text, NodeId passage, std::span<const NodeId> entities,
                         EmbeddingView embedding);

  /// Drops entities with no incident proposition (renumbering the rest densely)
  /// and runs validate(). Further mutation is rejected.
  void finalize();
  bool finalized() const noexcept { return finalized_; }

  /// Throws InvariantViolation if any structural invariant is broken.
  void validate() const;

  bool contains(NodeId id) const noexcept;
  /// Sorted, duplicate-free neighbors.
  std::vector<NodeId> neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const;
  /// Every edge as (proposition, passage-or-entity), sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  std::size_t passage_count() const noexcept { return passages_.size(); }
  std::size_t proposition_count() const noexcept { return propositions_.size(); }
  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t node_count() const noexcept {
    return passages_.size() + propositions_.size() + entities_.size();
  }
  std::size_t edge_count() const noexcept { return edge_count_; }
  GraphCounts counts() const noexcept {
    return {passage_count(), proposition_count(), entity_count(), edge_count()};
  }
  std::size_t dimension() const noexcept { return dimension_; }

  const PassageRecord& passage(std::uint32_t i) const { return passages_.at(i); }
  const PropositionRecord& proposition(std::uint32_t i) const { return propositions_.at(i); }
  const EntityRecord& entity(std::uint32_t i) const { return entities_.at(i); }

  const std::vector<PassageRecord>& passages() const noexcept { return passages_; }
  const std::vector<PropositionRecord>& propositions() const noexcept { return propositions_; }
  const std::vector<EntityRecord>& entities() const noexcept { return entities_; }

  /// Proposition indices incident to a passage / entity, ascending.
  std::span<const std::uint32_t> passage_propositions(std::uint32_t passage) const {
    return passage_props_.at(passage);
  }
  std::span<const std::uint32_t> entity_propositions(std::uint32_t entity) const {
    return entity_props_.at(entity);
  }

  const EmbeddingMatrix& proposition_embeddings() const noexcept { return proposition_vecs_; }
  const EmbeddingMatrix& entity_embeddings() const noexcept { return entity_vecs_; }
  EmbeddingView proposition_embedding(std::uint32_t i) const { return proposition_vecs_.row(i); }
  EmbeddingView entity_embedding(std::uint32_t i) const { return entity_vecs_.row(i); }

  /// Flat numbering over all nodes: passages, then propositions, then entities.
  std::size_t flat_index(NodeId id) const noexcept;
  NodeId node_at(std::size_t flat) const noexcept;

  friend bool operator==(const HeteroGraph&, const HeteroGraph&) = default;

 private:
  void require_mutable() const;
  void check_embedding(EmbeddingView embedding);

  std::vector<PassageRecord> passages_;
  std::vector<PropositionRecord> propositions_;
  std::vector<EntityRecord> entities_;
  std::vector<std::vector<std::uint32_t>> passage_props_;
  std::vector<std::vector<std::uint32_t>> entity_props_;
  EmbeddingMatrix proposition_vecs_;
  EmbeddingMatrix entity_vecs_;
  std::size_t dimension_ = 0;
  std::size_t edge_count_ = 0;
  bool finalized_ = false;
};

}  // namespace propgraph
