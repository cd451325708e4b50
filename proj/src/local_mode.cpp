#include "propgraph/local_mode.hpp"

#include <spdlog/spdlog.h>

#include "propgraph/error.hpp"

namespace propgraph {

void LocalRunConfig::validate() const {
  if (max_iter == 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  suggest.validate();
}

ModeResult answer_naive(const std::string& question, const QueryContext& ctx,
                        const SuggestConfig& cfg, PropositionIds* retrieved) {
  const auto q = ctx.embed.embed_one(question);
  const auto ids = suggest_naive(q, ctx.graph(), cfg);
  std::vector<std::string> facts;
  for (const auto id : ids) facts.push_back(ctx.graph().proposition(id).text);
  if (retrieved) *retrieved = ids;
  return {ctx.gateway.final_answer(question, facts), true};
}

LocalResult answer_local(const std::string& question, const QueryContext& ctx,
                         const LocalRunConfig& cfg) {
  cfg.validate();
  const HeteroGraph& graph = ctx.graph();
  LocalResult result;
  LocalTrace& trace = result.trace;

  PropositionPool s_loc;
  PropositionPool s_pool;
  const auto q_start = ctx.embed.embed_one(question);
  trace.seed.query = question;
  trace.seed.suggested = suggest_naive(q_start, graph, cfg.suggest);
  trace.seed.kept = select(question, trace.seed.suggested, graph, ctx.gateway).kept;
  for (const auto id : trace.seed.kept) s_pool.insert(id, {Round::Seed, 0, 0});
  s_loc.merge(s_pool);

  trace.seed_verdict = ctx.gateway.evaluate_answerable(question, s_loc.texts(graph));
  if (trace.seed_verdict.answerable) {
    trace.collected = s_loc.ids();
    result.answer = trace.seed_verdict.answer;
    result.found = true;
    return result;
  }

  std::vector<std::string> queries{question};
  for (std::size_t iteration = 1; iteration <= cfg.max_iter; ++iteration) {
    LocalIteration it;
    // the first cycle keeps the seeds in the next pool; later cycles reseed on new picks only
    PropositionPool s_pool_new = iteration == 1 ? s_pool : PropositionPool{};
    ExclusionSet seen(s_loc.ids().begin(), s_loc.ids().end());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      QueryStep step;
      step.query = queries[qi];
      if (!s_pool.empty()) {
        const auto qv = qi == 0 && queries[qi] == question ? q_start : ctx.embed.embed_one(queries[qi]);
        step.suggested = suggest_local(qv, ctx.index, s_pool.ids(), cfg.suggest, seen);
        seen.insert(step.suggested.begin(), step.suggested.end());
        step.kept = select(queries[qi], step.suggested, graph, ctx.gateway).kept;
        for (const auto id : step.kept) s_pool_new.insert(id, {Round::Walk, iteration, qi});
      }
      it.steps.push_back(std::move(step));
    }
    s_loc.merge(s_pool_new);
    s_pool = std::move(s_pool_new);

    it.verdict = ctx.gateway.evaluate_answerable(question, s_loc.texts(graph));
    if (it.verdict.answerable) {
      trace.iterations.push_back(std::move(it));
      trace.collected = s_loc.ids();
      result.answer = trace.iterations.back().verdict.answer;
      result.found = true;
      return result;
    }
    if (iteration < cfg.max_iter) {
      it.next_queries = ctx.gateway.next_questions(question, s_loc.texts(graph));
      queries = it.next_queries;
    }
    trace.iterations.push_back(std::move(it));
  }

  trace.exhausted = true;
  trace.collected = s_loc.ids();
  spdlog::debug("local mode exhausted {} iterations, answering from {} facts", cfg.max_iter,
                s_loc.size());
  result.answer = ctx.gateway.final_answer(question, s_loc.texts(graph));
  return result;
}

}  // namespace propgraph
