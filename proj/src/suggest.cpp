#include "propgraph/suggest.hpp"

#include <algorithm>

#include "propgraph/error.hpp"

namespace propgraph {

bool PropositionPool::insert(std::uint32_t id, Provenance provenance) {
  if (!where_.emplace(id, ids_.size()).second) return false;
  ids_.push_back(id);
  provenance_.push_back(provenance);
  return true;
}

std::size_t PropositionPool::merge(const PropositionPool& other) {
  std::size_t added = 0;
  for (const auto id : other.ids()) added += insert(id, other.provenance(id)) ? 1 : 0;
  return added;
}

std::vector<std::string> PropositionPool::texts(const HeteroGraph& graph) const {
  std::vector<std::string> out;
  out.reserve(ids_.size());
  for (const auto id : ids_) out.push_back(graph.proposition(id).text);
  return out;
}

void SuggestConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  if (subgraph_size == 0) throw Error(ErrorCode::InvalidArgument, "subgraph size must be >= 1");
  walk.validate();
}

PropositionIds suggest_naive(EmbeddingView query, const HeteroGraph& graph,
                             const SuggestConfig& cfg) {
  PropositionIds out;
  for (const auto& s : top_k_similar(query, graph.proposition_embeddings(), cfg.k)) {
    out.push_back(static_cast<std::uint32_t>(s.index));
  }
  return out;
}

namespace {

struct Candidate {
  double score;
  std::uint32_t id;
};

PropositionIds top_candidates(std::vector<Candidate> cands, std::size_t k) {
  const auto by_score = [](const Candidate& a, const Candidate& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  };
  const auto keep = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    by_score);
  PropositionIds out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(cands[i].id);
  return out;
}

}  // namespace

PropositionIds suggest_local(EmbeddingView query, const GraphIndex& index,
                             std::span<const std::uint32_t> seeds, const SuggestConfig& cfg,
                             const ExclusionSet& exclude) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "local suggestion needs seeds");
  const HeteroGraph& graph = index.graph();
  const auto sub = extract_subgraph(index, seeds, cfg.subgraph_size, cfg.walk);
  const auto structural = build_structural_transition(graph, sub);
  const auto m = query_aware_transition(graph, sub, structural, query, cfg.walk);

  std::vector<std::uint32_t> local_seeds;
  for (const auto s : seeds) local_seeds.push_back(static_cast<std::uint32_t>(*sub.local_proposition(s)));
  const auto pi = ppr(m, local_seeds, cfg.walk);

  const ExclusionSet seed_set(seeds.begin(), seeds.end());
  std::vector<Candidate> cands;
  const auto& props = sub.propositions();
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (pi[i] <= 0.0 || seed_set.contains(props[i]) || exclude.contains(props[i])) continue;
    cands.push_back({pi[i], props[i]});
  }
  return top_candidates(std::move(cands), cfg.k);
}

GlobalSuggestion suggest_global(const std::vector<Walker>& walkers, const GraphIndex& index,
                                const SuggestConfig& cfg, const ExclusionSet& exclude) {
  GlobalSuggestion out;
  if (walkers.empty()) return out;
  const HeteroGraph& graph = index.graph();
  std::vector<std::uint32_t> members;
  for (const auto& w : walkers) members.push_back(w.proposition);
  const auto sub = extract_subgraph(index, members, cfg.subgraph_size, cfg.walk);
  const auto structural = build_structural_transition(graph, sub);
  const auto& props = sub.propositions();

  std::vector<double> total(props.size(), 0.0);
  std::vector<double> best(props.size(), -1.0);
  std::vector<std::size_t> best_walker(props.size(), 0);
  for (std::size_t w = 0; w < walkers.size(); ++w) {
    const auto m = query_aware_transition(graph, sub, structural, walkers[w].query, cfg.walk);
    const std::uint32_t seed = static_cast<std::uint32_t>(*sub.local_proposition(walkers[w].proposition));
    const auto pi = ppr(m, std::span<const std::uint32_t>(&seed, 1), cfg.walk);
    for (std::size_t i = 0; i < props.size(); ++i) {
      total[i] += pi[i];
      if (pi[i] > best[i]) {
        best[i] = pi[i];
        best_walker[i] = w;
      }
    }
  }

  const ExclusionSet member_set(members.begin(), members.end());
  std::vector<Candidate> cands;
  std::unordered_map<std::uint32_t, std::size_t> local_of;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (total[i] <= 0.0 || member_set.contains(props[i]) || exclude.contains(props[i])) continue;
    cands.push_back({total[i], props[i]});
    local_of[props[i]] = i;
  }
  out.ids = top_candidates(std::move(cands), cfg.k);
  for (const auto id : out.ids) out.best_walker.push_back(best_walker[local_of.at(id)]);
  return out;
}

Selection select(const std::string& query, const PropositionIds& candidates,
                 const HeteroGraph& graph, const LlmGateway& gateway) {
  Selection out;
  if (candidates.empty()) return out;
  std::vector<std::string> texts;
  texts.reserve(candidates.size());
  for (const auto id : candidates) texts.push_back(graph.proposition(id).text);
  const auto verdict = gateway.select_relevant(query, texts);
  for (const auto i : verdict.kept) out.kept.push_back(candidates[i]);
  for (const auto i : verdict.pruned) out.pruned.push_back(candidates[i]);
  return out;
}

}  // namespace propgraph
