#include "propgraph/graph.hpp"

#include <algorithm>
#include <charconv>

#include "propgraph/error.hpp"

namespace propgraph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ExtractionFailed: return "ExtractionFailed";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Passage: return "psg";
    case NodeKind::Proposition: return "prop";
    case NodeKind::Entity: return "ent";
  }
  return "?";
}

std::string to_string(NodeId id) {
  return std::string(to_string(id.kind)) + ":" + std::to_string(id.index);
}

NodeId parse_node_id(std::string_view tagged) {
  const auto colon = tagged.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::CorruptFile, "malformed node id '" + std::string(tagged) + "'");
  }
  const auto tag = tagged.substr(0, colon);
  const auto digits = tagged.substr(colon + 1);
  NodeId id;
  if (tag == "psg") {
    id.kind = NodeKind::Passage;
  } else if (tag == "prop") {
    id.kind = NodeKind::Proposition;
  } else if (tag == "ent") {
    id.kind = NodeKind::Entity;
  } else {
    throw Error(ErrorCode::CorruptFile, "unknown node kind '" + std::string(tag) + "'");
  }
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id.index);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    throw Error(ErrorCode::CorruptFile, "malformed node index '" + std::string(tagged) + "'");
  }
  return id;
}

void HeteroGraph::require_mutable() const {
  if (finalized_) throw Error(ErrorCode::InvalidArgument, "graph is finalized");
}

void HeteroGraph::check_embedding(EmbeddingView embedding) {
  if (dimension_ == 0) {
    if (embedding.empty()) throw Error(ErrorCode::DimensionMismatch, "empty embedding");
    dimension_ = embedding.size();
    proposition_vecs_.set_dimension(dimension_);
    entity_vecs_.set_dimension(dimension_);
  }
  if (embedding.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding dimension " + std::to_string(embedding.size()) + ", graph uses " +
                    std::to_string(dimension_));
  }
  if (!is_unit_norm(embedding)) {
    throw Error(ErrorCode::NotNormalized,
                "embedding norm " + std::to_string(l2_norm(embedding)) + " is not 1");
  }
}

NodeId HeteroGraph::add_passage(std::string text, std::string source_doc, CharSpan span) {
  require_mutable();
  if (text.empty()) throw Error(ErrorCode::EmptyText, "passage text is empty");
  const auto id = NodeId::passage(static_cast<std::uint32_t>(passages_.size()));
  passages_.push_back({id, std::move(text), std::move(source_doc), span});
  passage_props_.emplace_back();
  return id;
}

NodeId HeteroGraph::add_entity(std::string canonical_name, EmbeddingView embedding,
                               std::vector<std::string> aliases) {
  require_mutable();
  if (canonical_name.empty()) throw Error(ErrorCode::EmptyText, "entity name is empty");
  check_embedding(embedding);
  const auto id = NodeId::entity(static_cast<std::uint32_t>(entities_.size()));
  EntityRecord record{id, std::move(canonical_name), {}};
  record.aliases.push_back(record.canonical_name);
  for (auto& a : aliases) {
    if (std::find(record.aliases.begin(), record.aliases.end(), a) == record.aliases.end()) {
      record.aliases.push_back(std::move(a));
    }
  }
  entities_.push_back(std::move(record));
  entity_props_.emplace_back();
  entity_vecs_.push_back(embedding);
  return id;
}

void HeteroGraph::add_alias(NodeId entity, const std::string& alias) {
  require_mutable();
  if (!contains(entity) || entity.kind != NodeKind::Entity) {
    throw Error(ErrorCode::UnknownNode, "no entity " + to_string(entity));
  }
  auto& aliases = entities_[entity.index].aliases;
  if (std::find(aliases.begin(), aliases.end(), alias) == aliases.end()) aliases.push_back(alias);
}

NodeId HeteroGraph::add_proposition(std::string text, NodeId passage,
                                    std::span<const NodeId> entities, EmbeddingView embedding) {
  require_mutable();
  if (text.empty()) throw Error(ErrorCode::EmptyText, "proposition text is empty");
  if (passage.kind != NodeKind::Passage || !contains(passage)) {
    throw Error(ErrorCode::UnknownNode, "no passage " + to_string(passage));
  }
  std::vector<NodeId> refs;
  refs.reserve(entities.size());
  for (const NodeId e : entities) {
    if (e.kind != NodeKind::Entity || !contains(e)) {
      throw Error(ErrorCode::UnknownNode, "no entity " + to_string(e));
    }
    if (std::find(refs.begin(), refs.end(), e) == refs.end()) refs.push_back(e);
  }
  check_embedding(embedding);

  const auto index = static_cast<std::uint32_t>(propositions_.size());
  const auto id = NodeId::proposition(index);
  passage_props_[passage.index].push_back(index);
  for (const NodeId e : refs) entity_props_[e.index].push_back(index);
  edge_count_ += 1 + refs.size();
  propositions_.push_back({id, std::move(text), passage, std::move(refs)});
  proposition_vecs_.push_back(embedding);
  return id;
}

void HeteroGraph::finalize() {
  if (finalized_) return;
  std::vector<bool> keep(entities_.size());
  std::vector<std::uint32_t> remap(entities_.size(), 0);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    keep[i] = !entity_props_[i].empty();
    if (keep[i]) remap[i] = next++;
  }
  if (next != entities_.size()) {
    std::vector<EntityRecord> entities;
    std::vector<std::vector<std::uint32_t>> entity_props;
    entities.reserve(next);
    entity_props.reserve(next);
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      if (!keep[i]) continue;
      entities.push_back(std::move(entities_[i]));
      entities.back().id.index = remap[i];
      entity_props.push_back(std::move(entity_props_[i]));
    }
    entities_ = std::move(entities);
    entity_props_ = std::move(entity_props);
    entity_vecs_.retain(keep);
    for (auto& p : propositions_) {
      for (auto& e : p.entity_refs) e.index = remap[e.index];
    }
  }
  validate();
  finalized_ = true;
}

void HeteroGraph::validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::InvariantViolation, what);
  };
  if (proposition_vecs_.rows() != propositions_.size()) fail("proposition embedding count");
  if (entity_vecs_.rows() != entities_.size()) fail("entity embedding count");

  std::size_t edges = 0;
  std::vector<std::size_t> entity_degree(entities_.size(), 0);
  std::vector<std::size_t> passage_degree(passages_.size(), 0);
  for (std::size_t i = 0; i < propositions_.size(); ++i) {
    const auto& p = propositions_[i];
    if (p.id != NodeId::proposition(static_cast<std::uint32_t>(i))) fail("proposition id order");
    if (p.text.empty()) fail("empty proposition text");
    if (p.passage.kind != NodeKind::Passage || p.passage.index >= passages_.size()) {
      fail(to_string(p.id) + " has no valid passage");
    }
    ++passage_degree[p.passage.index];
    for (std::size_t a = 0; a < p.entity_refs.size(); ++a) {
      const NodeId e = p.entity_refs[a];
      if (e.kind != NodeKind::Entity || e.index >= entities_.size()) {
        fail(to_string(p.id) + " references missing " + to_string(e));
      }
      for (std::size_t b = a + 1; b < p.entity_refs.size(); ++b) {
        if (p.entity_refs[b] == e) fail(to_string(p.id) + " has duplicate entity edge");
      }
      ++entity_degree[e.index];
    }
    edges += 1 + p.entity_refs.size();
    if (!is_unit_norm(proposition_vecs_.row(i))) fail(to_string(p.id) + " embedding not unit");
  }
  if (edges != edge_count_) fail("edge count mismatch");
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    if (passages_[i].id != NodeId::passage(static_cast<std::uint32_t>(i))) fail("passage id order");
    if (passages_[i].text.empty()) fail("empty passage text");
    if (passage_props_[i].size() != passage_degree[i]) fail("passage adjacency mismatch");
  }
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].id != NodeId::entity(static_cast<std::uint32_t>(i))) fail("entity id order");
    if (entities_[i].canonical_name.empty()) fail("empty entity name");
    if (entity_props_[i].size() != entity_degree[i]) fail("entity adjacency mismatch");
    if (finalized_ && entity_degree[i] == 0) fail(to_string(entities_[i].id) + " is orphaned");
  }
}

bool HeteroGraph::contains(NodeId id) const noexcept {
  switch (id.kind) {
    case NodeKind::Passage: return id.index < passages_.size();
    case NodeKind::Proposition: return id.index < propositions_.size();
    case NodeKind::Entity: return id.index < entities_.size();
  }
  return false;
}

std::vector<NodeId> HeteroGraph::neighbors(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownNode, "no node " + to_string(id));
  std::vector<NodeId> out;
  switch (id.kind) {
    case NodeKind::Proposition: {
      const auto& p = propositions_[id.index];
      out.reserve(1 + p.entity_refs.size());
      out.push_back(p.passage);
      out.insert(out.end(), p.entity_refs.begin(), p.entity_refs.end());
      break;
    }
    case NodeKind::Passage:
      for (auto i : passage_props_[id.index]) out.push_back(NodeId::proposition(i));
      break;
    case NodeKind::Entity:
      for (auto i : entity_props_[id.index]) out.push_back(NodeId::proposition(i));
      break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t HeteroGraph::degree(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownNode, "no node " + to_string(id));
  switch (id.kind) {
    case NodeKind::Proposition: return 1 + propositions_[id.index].entity_refs.size();
    case NodeKind::Passage: return passage_props_[id.index].size();
    case NodeKind::Entity: return entity_props_[id.index].size();
  }
  return 0;
}

std::vector<std::pair<NodeId, NodeId>> HeteroGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (const auto& p : propositions_) {
    out.emplace_back(p.id, p.passage);
    for (const NodeId e : p.entity_refs) out.emplace_back(p.id, e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t HeteroGraph::flat_index(NodeId id) const noexcept {
  switch (id.kind) {
    case NodeKind::Passage: return id.index;
    case NodeKind::Proposition: return passages_.size() + id.index;
    case NodeKind::Entity: return passages_.size() + propositions_.size() + id.index;
  }
  return 0;
}

NodeId HeteroGraph::node_at(std::size_t flat) const noexcept {
  if (flat < passages_.size()) return NodeId::passage(static_cast<std::uint32_t>(flat));
  flat -= passages_.size();
  if (flat < propositions_.size()) return NodeId::proposition(static_cast<std::uint32_t>(flat));
  flat -= propositions_.size();
  return NodeId::entity(static_cast<std::uint32_t>(flat));
}

}  // namespace propgraph
