#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "propgraph/encoding.hpp"
#include "propgraph/graph.hpp"
#include "propgraph/llm.hpp"
#include "propgraph/text.hpp"

namespace propgraph {

struct CorpusDocument {
  std::string doc_id;
  std::string text;
};

/// A directory of text files (doc_id = file name, sorted) or a JSONL file with
/// "doc_id" and "text" fields. Duplicate ids throw InvalidArgument.
std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path);

struct ChunkingPolicy {
  std::size_t target_tokens = 300;
  std::size_t overlap_tokens = 0;
  void validate() const;
};

struct Chunk {
  std::string text;
  CharSpan span;
};

/// Packs whole sentences into chunks of at most target_tokens; a sentence that
/// alone exceeds the target is cut at word boundaries. Without overlap the spans
/// tile [0, len) exactly; chunk text is the span with outer whitespace removed.
/// With overlap each chunk after the first restarts at the trailing sentences of
/// its predecessor that fit overlap_tokens.
std::vector<Chunk> chunk(const CorpusDocument& doc, const ChunkingPolicy& policy,
                         const TokenCounter& count = default_token_counter());

struct ReconciliationPolicy {
  double synonym_threshold = 0.9;
};

struct ReconciledEntity {
  std::string canonical_name;
  std::vector<std::string> aliases;
  Embedding embedding;
};

/// Greedy streaming entity merge. A surface equal to a known name or alias
/// (ignoring case) joins that entity; otherwise it joins the first entity whose
/// canonical-name embedding has cosine >= threshold; otherwise it founds a new one.
class EntityReconciler {
 public:
  explicit EntityReconciler(ReconciliationPolicy policy = {}) : policy_(policy) {}

  /// Canonical index of a surface already seen under this exact spelling, if any.
  std::optional<std::size_t> lookup(const std::string& surface) const;
  /// Canonical index for `surface`; `embedding` must be unit-norm.
  std::size_t reconcile(const std::string& surface, EmbeddingView embedding);

  const std::vector<ReconciledEntity>& entities() const noexcept { return entities_; }

 private:
  ReconciliationPolicy policy_;
  std::vector<ReconciledEntity> entities_;
  std::vector<std::pair<std::string, std::size_t>> names_;  // lowercased surface -> index
};

/// Surface -> canonical index for a batch, in input order.
std::vector<std::size_t> reconcile_entities(
    const std::vector<std::pair<std::string, Embedding>>& surfaces,
    const ReconciliationPolicy& policy, std::vector<ReconciledEntity>* entities = nullptr);

struct IndexingOptions {
  ChunkingPolicy chunking;
  ReconciliationPolicy reconciliation;
  /// Concurrent passage extractions; graph mutation stays in document order.
  std::size_t workers = 1;
};

struct IndexingReport {
  std::size_t documents = 0;
  std::size_t passages = 0;
  std::size_t failed_passages = 0;
};

/// chunk -> NER -> propositions -> embed -> reconcile -> add, then finalize.
/// A passage whose extraction fails is kept without propositions.
HeteroGraph index_corpus(const std::vector<CorpusDocument>& docs, const LlmGateway& gateway,
                         EmbedBackend& embed, const IndexingOptions& options = {},
                         IndexingReport* report = nullptr);

GraphCounts graph_stats(const HeteroGraph& graph);

}  // namespace propgraph
