#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "propgraph/encoding.hpp"
#include "propgraph/llm.hpp"
#include "propgraph/suggest.hpp"
#include "propgraph/traversal.hpp"

namespace propgraph {

/// Shared, read-only handles used by every query mode.
struct QueryContext {
  const GraphIndex& index;
  const LlmGateway& gateway;
  EmbedBackend& embed;

  const HeteroGraph& graph() const noexcept { return index.graph(); }
};

struct LocalRunConfig {
  std::size_t max_iter = 3;
  SuggestConfig suggest;
  void validate() const;
};

struct QueryStep {
  std::string query;
  PropositionIds suggested;
  PropositionIds kept;
};

struct LocalIteration {
  std::vector<QueryStep> steps;
  EvalVerdict verdict;
  std::vector<std::string> next_queries;
};

struct LocalTrace {
  QueryStep seed;
  EvalVerdict seed_verdict;
  std::vector<LocalIteration> iterations;
  /// s_loc in insertion order.
  PropositionIds collected;
  /// max_iter ran out without a sufficient context.
  bool exhausted = false;
};

struct ModeResult {
  std::string answer;
  bool found = false;
};

struct LocalResult : ModeResult {
  LocalTrace trace;
};

/// Naive mode: top-k propositions by cosine, answered directly.
ModeResult answer_naive(const std::string& question, const QueryContext& ctx,
                        const SuggestConfig& cfg, PropositionIds* retrieved = nullptr);

/// Local mode. Seeds with naive suggestion + Select, checks sufficiency once,
/// then runs Suggestion-Selection cycles seeded on the current pool until Eval
/// answers or max_iter is reached. In the latter case the answer is synthesized
/// from everything collected and `found` is false.
LocalResult answer_local(const std::string& question, const QueryContext& ctx,
                         const LocalRunConfig& cfg);

}  // namespace propgraph
