#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "propgraph/leiden.hpp"
#include "propgraph/local_mode.hpp"
#include "propgraph/suggest.hpp"
#include "propgraph/text.hpp"

namespace propgraph {

struct CommunityBounds {
  std::size_t min_size = 10;
  std::size_t max_size = 150;
};

struct RocchioWeights {
  double alpha = 1.0;
  double beta = 0.7;
  double gamma = 0.15;
};

struct GlobalRunConfig {
  std::size_t breadth_m = 10;
  std::size_t min_facts = 200;
  std::size_t max_iter = 5;
  std::size_t node_budget = 8000;
  CommunityBounds community_size;
  RocchioWeights rocchio;
  std::size_t max_tokens_report = 8000;
  std::size_t passage_token_limit = 500;
  std::size_t max_tokens_community_chunks = 8000;
  SuggestConfig suggest;
  LeidenOptions leiden;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Anchor collection

/// Feedback from one exploration unit: a partition walk, or one sub-query of the
/// seeding round (a single "walker" whose query is the sub-query embedding).
struct FeedbackRound {
  std::vector<Embedding> walker_queries;
  /// Kept propositions and, for each, the walker that reached it with the highest probability.
  PropositionIds found;
  std::vector<std::size_t> found_by;
  PropositionIds pruned;
};

struct QueryState {
  std::uint32_t proposition = 0;
  std::vector<double> q_o;
  std::vector<double> q_plus;
  std::vector<double> q_minus;
  /// alpha q_o + beta q_plus - gamma q_minus, before normalization.
  std::vector<double> combined;
  /// `combined` scaled to unit length.
  Embedding query;
  /// Indices into the rounds that found this proposition.
  std::vector<std::size_t> rounds;
};

/// One QueryState per pool member, in pool order. q_o averages the best walker
/// query over every round that found the member, q_minus averages the mean
/// embedding of each such round's pruned candidates (zero when none).
std::vector<QueryState> compute_queries(const PropositionPool& pool,
                                        const std::vector<FeedbackRound>& rounds,
                                        const HeteroGraph& graph, const RocchioWeights& weights);

/// Round-robin split into exactly m parts (some possibly empty).
std::vector<PropositionIds> partition_pool(const PropositionIds& pool, std::size_t m);

enum class AnchorStop { MinFacts, MaxIter, PoolEmptied };
std::string_view to_string(AnchorStop stop) noexcept;

struct AnchorIteration {
  std::size_t pool_size = 0;
  std::size_t partitions = 0;
  std::size_t suggested = 0;
  std::size_t kept = 0;
  std::size_t anchors_after = 0;
};

struct AnchorTrace {
  std::vector<std::string> sub_queries;
  std::size_t seed_anchors = 0;
  std::vector<AnchorIteration> iterations;
  AnchorStop stop = AnchorStop::MinFacts;
};

struct AnchorResult {
  PropositionPool anchors;
  AnchorTrace trace;
};

AnchorResult collect_anchors(const std::string& question, const QueryContext& ctx,
                             const GlobalRunConfig& cfg);

// ---------------------------------------------------------------------------
// Communities

struct Community {
  std::size_t id = 0;
  std::vector<NodeId> nodes;  // sorted
  std::size_t level = 0;
};

/// Hierarchical Leiden on the whole graph with unit weights; each level lists
/// the community label of every node in flat order.
std::vector<std::vector<std::size_t>> community_levels(const HeteroGraph& graph,
                                                       std::size_t max_size,
                                                       const LeidenOptions& options);

/// Communities of every level, duplicates removed, kept when
/// min_size <= |c| <= max_size. Ids are positions in the returned list.
std::vector<Community> detect_communities(const HeteroGraph& graph, const CommunityBounds& bounds,
                                          const LeidenOptions& options = {});

struct BudgetedSelection {
  /// Indices into the candidate list, in pick order.
  std::vector<std::size_t> chosen;
  std::size_t budget_used = 0;
  std::size_t anchors_covered = 0;
};

/// Greedy pick of the candidate with the most not-yet-covered anchors per node,
/// ties to the smaller community and then the lower id, until every anchor that
/// some candidate contains is covered or the budget is spent.
BudgetedSelection select_communities(const std::vector<NodeId>& anchors,
                                     const std::vector<Community>& candidates, std::size_t budget);

/// Entities, propositions and passages (each cut to passage_token_limit) of every
/// chosen community, packed line by line into chunks of at most
/// max_tokens_community_chunks tokens.
std::vector<std::string> build_reports(const std::vector<const Community*>& chosen,
                                       const HeteroGraph& graph, const GlobalRunConfig& cfg,
                                       const TokenCounter& count = default_token_counter());

/// Placement order for n items ranked best-first: odd ranks fill from the front,
/// even ranks from the back, so the best items sit at both ends. n = 3 gives
/// ranks 1, 3, 2.
std::vector<std::size_t> interleave_order(std::size_t n);

struct ScoredReport {
  std::string text;
  int score = 0;
};

struct GlobalTrace {
  AnchorTrace anchors;
  std::size_t anchor_count = 0;
  std::size_t candidate_communities = 0;
  std::vector<std::size_t> chosen_communities;
  std::size_t budget_used = 0;
  std::vector<ScoredReport> reports;
  std::vector<std::string> final_context;
  bool fallback_to_anchors = false;
};

struct GlobalResult : ModeResult {
  GlobalTrace trace;
};

/// Anchors, communities over the anchors, one intermediary answer per chunk,
/// best answers placed at both ends of the final context.
GlobalResult answer_global(const std::string& question, const QueryContext& ctx,
                           const GlobalRunConfig& cfg);
/// Same, reusing precomputed candidate communities.
GlobalResult answer_global(const std::string& question, const QueryContext& ctx,
                           const GlobalRunConfig& cfg, const std::vector<Community>& candidates);

}  // namespace propgraph
