#include "propgraph/global_mode.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "propgraph/error.hpp"

namespace propgraph {

void GlobalRunConfig::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (breadth_m == 0) bad("breadth_m must be >= 1");
  if (min_facts == 0) bad("min_facts must be >= 1");
  if (node_budget == 0) bad("node_budget must be >= 1");
  if (community_size.min_size == 0 || community_size.min_size > community_size.max_size) {
    bad("community size bounds must satisfy 1 <= min <= max");
  }
  if (rocchio.alpha < 0 || rocchio.beta < 0 || rocchio.gamma < 0) bad("Rocchio weights must be >= 0");
  if (max_tokens_report == 0 || passage_token_limit == 0 || max_tokens_community_chunks == 0) {
    bad("token limits must be positive");
  }
  suggest.validate();
}

// ---------------------------------------------------------------------------
// Anchor collection

std::vector<QueryState> compute_queries(const PropositionPool& pool,
                                        const std::vector<FeedbackRound>& rounds,
                                        const HeteroGraph& graph, const RocchioWeights& weights) {
  const std::size_t dim = graph.dimension();
  // mean pruned embedding per round
  std::vector<std::vector<double>> pruned_mean(rounds.size(), std::vector<double>(dim, 0.0));
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto& pruned = rounds[r].pruned;
    if (pruned.empty()) continue;
    for (const auto id : pruned) {
      const auto h = graph.proposition_embedding(id);
      for (std::size_t d = 0; d < dim; ++d) pruned_mean[r][d] += h[d];
    }
    for (auto& x : pruned_mean[r]) x /= static_cast<double>(pruned.size());
  }

  std::map<std::uint32_t, std::vector<std::pair<std::size_t, std::size_t>>> found_in;  // (round, walker)
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    for (std::size_t i = 0; i < rounds[r].found.size(); ++i) {
      found_in[rounds[r].found[i]].emplace_back(r, rounds[r].found_by[i]);
    }
  }

  std::vector<QueryState> out;
  out.reserve(pool.size());
  for (const auto u : pool.ids()) {
    const auto it = found_in.find(u);
    if (it == found_in.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "no feedback round found proposition " + std::to_string(u));
    }
    QueryState s;
    s.proposition = u;
    s.q_o.assign(dim, 0.0);
    s.q_minus.assign(dim, 0.0);
    const auto h = graph.proposition_embedding(u);
    s.q_plus.assign(h.begin(), h.end());
    for (const auto& [r, w] : it->second) {
      s.rounds.push_back(r);
      const auto& q = rounds[r].walker_queries.at(w);
      if (q.size() != dim) throw Error(ErrorCode::DimensionMismatch, "walker query dimension");
      for (std::size_t d = 0; d < dim; ++d) {
        s.q_o[d] += q[d];
        s.q_minus[d] += pruned_mean[r][d];
      }
    }
    const double c = static_cast<double>(it->second.size());
    for (std::size_t d = 0; d < dim; ++d) {
      s.q_o[d] /= c;
      s.q_minus[d] /= c;
    }
    s.combined.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      s.combined[d] = weights.alpha * s.q_o[d] + weights.beta * s.q_plus[d] - weights.gamma * s.q_minus[d];
    }
    s.query = normalized(std::span<const double>(s.combined));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PropositionIds> partition_pool(const PropositionIds& pool, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "partition count must be >= 1");
  std::vector<PropositionIds> parts(m);
  for (std::size_t i = 0; i < pool.size(); ++i) parts[i % m].push_back(pool[i]);
  return parts;
}

std::string_view to_string(AnchorStop stop) noexcept {
  switch (stop) {
    case AnchorStop::MinFacts: return "min_facts";
    case AnchorStop::MaxIter: return "max_iter";
    case AnchorStop::PoolEmptied: return "pool_emptied";
  }
  return "?";
}

AnchorResult collect_anchors(const std::string& question, const QueryContext& ctx,
                             const GlobalRunConfig& cfg) {
  cfg.validate();
  const HeteroGraph& graph = ctx.graph();
  AnchorResult result;
  AnchorTrace& trace = result.trace;

  trace.sub_queries = ctx.gateway.decompose(question, cfg.breadth_m);
  PropositionPool s_pool;
  std::vector<FeedbackRound> rounds;
  for (std::size_t j = 0; j < trace.sub_queries.size(); ++j) {
    const auto& q = trace.sub_queries[j];
    FeedbackRound round;
    round.walker_queries.push_back(ctx.embed.embed_one(q));
    const auto suggested = suggest_naive(round.walker_queries.front(), graph, cfg.suggest);
    auto sel = select(q, suggested, graph, ctx.gateway);
    for (const auto id : sel.kept) {
      s_pool.insert(id, {Round::Seed, 0, j});
      round.found.push_back(id);
      round.found_by.push_back(0);
    }
    round.pruned = std::move(sel.pruned);
    rounds.push_back(std::move(round));
  }
  PropositionPool& s_glb = result.anchors;
  s_glb = s_pool;
  trace.seed_anchors = s_glb.size();

  std::size_t iteration = 0;
  while (true) {
    if (s_glb.size() >= cfg.min_facts) {
      trace.stop = AnchorStop::MinFacts;
      break;
    }
    if (iteration >= cfg.max_iter) {
      trace.stop = AnchorStop::MaxIter;
      break;
    }
    if (s_pool.empty()) {
      trace.stop = AnchorStop::PoolEmptied;
      break;
    }
    AnchorIteration it;
    it.pool_size = s_pool.size();
    const auto states = compute_queries(s_pool, rounds, graph, cfg.rocchio);
    std::map<std::uint32_t, const QueryState*> state_of;
    for (const auto& s : states) state_of[s.proposition] = &s;

    const ExclusionSet collected(s_glb.ids().begin(), s_glb.ids().end());
    PropositionPool s_pool_new;
    std::vector<FeedbackRound> next_rounds;
    const auto parts = partition_pool(s_pool.ids(), cfg.breadth_m);
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (parts[p].empty()) continue;
      ++it.partitions;
      std::vector<Walker> walkers;
      FeedbackRound round;
      for (const auto u : parts[p]) {
        walkers.push_back({u, state_of.at(u)->query});
        round.walker_queries.push_back(state_of.at(u)->query);
      }
      const auto suggestion = suggest_global(walkers, ctx.index, cfg.suggest, collected);
      auto sel = select(question, suggestion.ids, graph, ctx.gateway);
      it.suggested += suggestion.ids.size();
      it.kept += sel.kept.size();
      for (const auto id : sel.kept) {
        s_pool_new.insert(id, {Round::Walk, iteration + 1, p});
        const auto pos = std::find(suggestion.ids.begin(), suggestion.ids.end(), id) - suggestion.ids.begin();
        round.found.push_back(id);
        round.found_by.push_back(suggestion.best_walker[static_cast<std::size_t>(pos)]);
      }
      round.pruned = std::move(sel.pruned);
      next_rounds.push_back(std::move(round));
    }
    s_glb.merge(s_pool_new);
    s_pool = std::move(s_pool_new);
    rounds = std::move(next_rounds);
    ++iteration;
    it.anchors_after = s_glb.size();
    trace.iterations.push_back(it);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Communities

std::vector<std::vector<std::size_t>> community_levels(const HeteroGraph& graph,
                                                       std::size_t max_size,
                                                       const LeidenOptions& options) {
  std::vector<WeightedGraph::Edge> edges;
  for (const auto& [a, b] : graph.edges()) edges.push_back({graph.flat_index(a), graph.flat_index(b), 1.0});
  const auto g = WeightedGraph::from_edges(graph.node_count(), std::move(edges));
  return hierarchical_leiden(g, max_size, options);
}

std::vector<Community> detect_communities(const HeteroGraph& graph, const CommunityBounds& bounds,
                                          const LeidenOptions& options) {
  std::vector<Community> out;
  std::set<std::vector<NodeId>> seen;
  const auto levels = community_levels(graph, bounds.max_size, options);
  for (std::size_t level = 0; level < levels.size(); ++level) {
    const auto& labels = levels[level];
    const std::size_t count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<NodeId>> members(count);
    for (std::size_t f = 0; f < labels.size(); ++f) members[labels[f]].push_back(graph.node_at(f));
    for (auto& nodes : members) {
      std::sort(nodes.begin(), nodes.end());
      if (nodes.size() < bounds.min_size || nodes.size() > bounds.max_size) continue;
      if (!seen.insert(nodes).second) continue;
      out.push_back({out.size(), std::move(nodes), level});
    }
  }
  return out;
}

BudgetedSelection select_communities(const std::vector<NodeId>& anchors,
                                     const std::vector<Community>& candidates, std::size_t budget) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "community budget must be positive");
  BudgetedSelection out;
  const std::set<NodeId> anchor_set(anchors.begin(), anchors.end());

  // anchors inside each candidate
  std::vector<std::vector<NodeId>> holds(candidates.size());
  std::set<NodeId> coverable;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (const auto& n : candidates[c].nodes) {
      if (anchor_set.contains(n)) {
        holds[c].push_back(n);
        coverable.insert(n);
      }
    }
  }

  std::set<NodeId> covered;
  std::vector<bool> taken(candidates.size(), false);
  while (covered.size() < coverable.size() && out.budget_used < budget) {
    std::size_t best = candidates.size();
    std::size_t best_new = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      std::size_t fresh = 0;
      for (const auto& n : holds[c]) fresh += covered.contains(n) ? 0 : 1;
      if (best == candidates.size()) {
        best = c;
        best_new = fresh;
        continue;
      }
      // fresh / size compared exactly by cross-multiplication
      const auto lhs = fresh * candidates[best].nodes.size();
      const auto rhs = best_new * candidates[c].nodes.size();
      const bool better =
          lhs > rhs ||
          (lhs == rhs && (candidates[c].nodes.size() < candidates[best].nodes.size() ||
                          (candidates[c].nodes.size() == candidates[best].nodes.size() &&
                           candidates[c].id < candidates[best].id)));
      if (better) {
        best = c;
        best_new = fresh;
      }
    }
    if (best == candidates.size()) break;
    taken[best] = true;
    out.chosen.push_back(best);
    out.budget_used += candidates[best].nodes.size();
    for (const auto& n : holds[best]) covered.insert(n);
  }
  out.anchors_covered = covered.size();
  return out;
}

std::vector<std::string> build_reports(const std::vector<const Community*>& chosen,
                                       const HeteroGraph& graph, const GlobalRunConfig& cfg,
                                       const TokenCounter& count) {
  std::vector<std::string> lines;
  for (const auto* c : chosen) {
    std::vector<std::string> entities;
    std::vector<std::string> props;
    std::vector<std::string> passages;
    for (const auto& n : c->nodes) {
      switch (n.kind) {
        case NodeKind::Entity:
          entities.push_back("- " + graph.entity(n.index).canonical_name);
          break;
        case NodeKind::Proposition:
          props.push_back("- " + graph.proposition(n.index).text);
          break;
        case NodeKind::Passage: {
          auto text = truncate_to_tokens(graph.passage(n.index).text, cfg.passage_token_limit);
          std::replace(text.begin(), text.end(), '\n', ' ');
          passages.push_back("- " + text);
          break;
        }
      }
    }
    lines.push_back("Community " + std::to_string(c->id));
    const auto section = [&](const char* title, std::vector<std::string>& items) {
      if (items.empty()) return;
      lines.emplace_back(title);
      for (auto& i : items) lines.push_back(std::move(i));
    };
    section("Entities:", entities);
    section("Propositions:", props);
    section("Passages:", passages);
  }

  std::vector<std::string> chunks;
  std::string current;
  for (auto& line : lines) {
    if (count(line) > cfg.max_tokens_community_chunks) {
      line = truncate_to_tokens(line, cfg.max_tokens_community_chunks);
    }
    std::string joined = current.empty() ? line : current + "\n" + line;
    if (!current.empty() && count(joined) > cfg.max_tokens_community_chunks) {
      chunks.push_back(std::move(current));
      current = line;
    } else {
      current = std::move(joined);
    }
  }
  if (!current.empty()) chunks.push_back(std::move(current));
  return chunks;
}

std::vector<std::size_t> interleave_order(std::size_t n) {
  std::vector<std::size_t> slots(n);
  std::size_t front = 0;
  std::size_t back = n;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (rank % 2 == 0) {
      slots[front++] = rank;
    } else {
      slots[--back] = rank;
    }
  }
  return slots;
}

namespace {

// Keeps best-first items while they fit the token budget.
std::vector<std::string> fit_budget(const std::vector<std::string>& ranked, std::size_t max_tokens) {
  std::vector<std::string> out;
  std::size_t used = 0;
  for (const auto& item : ranked) {
    const auto t = estimate_tokens(item);
    if (used + t > max_tokens) {
      if (out.empty()) out.push_back(truncate_to_tokens(item, max_tokens));
      break;
    }
    used += t;
    out.push_back(item);
  }
  return out;
}

}  // namespace

GlobalResult answer_global(const std::string& question, const QueryContext& ctx,
                           const GlobalRunConfig& cfg) {
  return answer_global(question, ctx, cfg,
                       detect_communities(ctx.graph(), cfg.community_size, cfg.leiden));
}

GlobalResult answer_global(const std::string& question, const QueryContext& ctx,
                           const GlobalRunConfig& cfg, const std::vector<Community>& candidates) {
  const HeteroGraph& graph = ctx.graph();
  GlobalResult result;
  GlobalTrace& trace = result.trace;

  auto anchors = collect_anchors(question, ctx, cfg);
  trace.anchors = anchors.trace;
  trace.anchor_count = anchors.anchors.size();
  trace.candidate_communities = candidates.size();

  std::vector<NodeId> anchor_nodes;
  for (const auto id : anchors.anchors.ids()) anchor_nodes.push_back(NodeId::proposition(id));
  const auto picked = select_communities(anchor_nodes, candidates, cfg.node_budget);
  trace.budget_used = picked.budget_used;
  std::vector<const Community*> chosen;
  for (const auto c : picked.chosen) {
    trace.chosen_communities.push_back(candidates[c].id);
    chosen.push_back(&candidates[c]);
  }

  std::vector<std::string> ranked;
  if (!chosen.empty()) {
    for (const auto& chunk : build_reports(chosen, graph, cfg)) {
      auto ia = ctx.gateway.intermediary_answer(question, chunk);
      trace.reports.push_back({std::move(ia.text), ia.score});
    }
    std::vector<std::size_t> order(trace.reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return trace.reports[a].score > trace.reports[b].score;
    });
    for (const auto i : order) {
      const auto& r = trace.reports[i];
      if (r.score > 0 && !r.text.empty()) ranked.push_back(r.text);
    }
  }

  AnswerStyle style = AnswerStyle::Reports;
  if (ranked.empty()) {
    trace.fallback_to_anchors = true;
    ranked = anchors.anchors.texts(graph);
    style = AnswerStyle::Facts;
  }
  const auto kept = fit_budget(ranked, cfg.max_tokens_report);
  for (const auto rank : interleave_order(kept.size())) trace.final_context.push_back(kept[rank]);

  result.answer = ctx.gateway.final_answer(question, trace.final_context, style);
  result.found = !trace.fallback_to_anchors;
  return result;
}

}  // namespace propgraph
