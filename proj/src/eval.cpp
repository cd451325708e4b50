#include "propgraph/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "propgraph/error.hpp"
#include "propgraph/text.hpp"

namespace propgraph {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<std::string> answer_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in(normalize_answer(text));
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, long> counts;
  for (const auto& t : gold) ++counts[t];
  long same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  const double precision = static_cast<double>(same) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(same) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

ojson ids_json(const PropositionIds& ids) { return ojson(ids); }

ojson step_json(const QueryStep& s) {
  return {{"query", s.query}, {"suggested", ids_json(s.suggested)}, {"kept", ids_json(s.kept)}};
}

void local_events(const LocalResult& r, std::vector<ojson>& events) {
  const auto& t = r.trace;
  events.push_back({{"event", "seed"},
                    {"query", t.seed.query},
                    {"suggested", ids_json(t.seed.suggested)},
                    {"kept", ids_json(t.seed.kept)},
                    {"answerable", t.seed_verdict.answerable},
                    {"answer", t.seed_verdict.answer}});
  for (std::size_t i = 0; i < t.iterations.size(); ++i) {
    const auto& it = t.iterations[i];
    ojson steps = ojson::array();
    for (const auto& s : it.steps) steps.push_back(step_json(s));
    events.push_back({{"event", "iteration"},
                      {"iteration", i + 1},
                      {"steps", steps},
                      {"answerable", it.verdict.answerable},
                      {"answer", it.verdict.answer},
                      {"next_queries", it.next_queries}});
  }
  events.push_back({{"event", "answer"},
                    {"mode", "local"},
                    {"answer", r.answer},
                    {"found", r.found},
                    {"exhausted", t.exhausted},
                    {"collected", ids_json(t.collected)}});
}

void global_events(const GlobalResult& r, std::vector<ojson>& events) {
  const auto& t = r.trace;
  events.push_back({{"event", "decompose"}, {"sub_queries", t.anchors.sub_queries}});
  ojson iters = ojson::array();
  for (const auto& it : t.anchors.iterations) {
    iters.push_back({{"pool", it.pool_size},
                     {"partitions", it.partitions},
                     {"suggested", it.suggested},
                     {"kept", it.kept},
                     {"anchors", it.anchors_after}});
  }
  events.push_back({{"event", "anchors"},
                    {"seed_anchors", t.anchors.seed_anchors},
                    {"iterations", iters},
                    {"stop", to_string(t.anchors.stop)},
                    {"anchors", t.anchor_count}});
  events.push_back({{"event", "communities"},
                    {"candidates", t.candidate_communities},
                    {"chosen", t.chosen_communities},
                    {"budget_used", t.budget_used}});
  for (std::size_t i = 0; i < t.reports.size(); ++i) {
    events.push_back({{"event", "report"},
                      {"chunk", i},
                      {"score", t.reports[i].score},
                      {"text", t.reports[i].text}});
  }
  events.push_back({{"event", "answer"},
                    {"mode", "global"},
                    {"answer", r.answer},
                    {"found", r.found},
                    {"fallback_to_anchors", t.fallback_to_anchors},
                    {"context", t.final_context}});
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::istringstream in(cleaned);
  std::string word;
  std::string out;
  while (in >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  const auto p = normalize_answer(prediction);
  return std::any_of(golds.begin(), golds.end(),
                     [&](const std::string& g) { return normalize_answer(g) == p; })
             ? 1
             : 0;
}

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
  const auto p = answer_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(p, answer_tokens(g)));
  return best;
}

std::string_view to_string(QueryMode mode) noexcept {
  switch (mode) {
    case QueryMode::Naive: return "naive";
    case QueryMode::Local: return "local";
    case QueryMode::Global: return "global";
  }
  return "?";
}

std::optional<QueryMode> parse_query_mode(std::string_view name) noexcept {
  for (auto m : {QueryMode::Naive, QueryMode::Local, QueryMode::Global}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<QARecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read dataset " + path.string());
  std::vector<QARecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QARecord r{j.at("question").get<std::string>(), j.at("answers").get<std::vector<std::string>>()};
      if (r.answers.empty()) throw Error(ErrorCode::CorruptFile, "record without gold answers");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptFile, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptFile, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

QueryOutcome run_query(const std::string& question, QueryMode mode, const QueryContext& ctx,
                       const RunConfig& cfg, const std::vector<Community>* communities) {
  QueryOutcome out;
  out.events.push_back({{"event", "question"}, {"mode", to_string(mode)}, {"question", question}});
  switch (mode) {
    case QueryMode::Naive: {
      PropositionIds ids;
      const auto r = answer_naive(question, ctx, cfg.suggest(), &ids);
      out.events.push_back({{"event", "retrieve"}, {"ids", ids}});
      out.events.push_back({{"event", "answer"}, {"mode", "naive"}, {"answer", r.answer}, {"found", r.found}});
      out.answer = r.answer;
      out.found = r.found;
      break;
    }
    case QueryMode::Local: {
      const auto r = answer_local(question, ctx, cfg.local());
      local_events(r, out.events);
      out.answer = r.answer;
      out.found = r.found;
      break;
    }
    case QueryMode::Global: {
      const auto r = communities ? answer_global(question, ctx, cfg.global(), *communities)
                                 : answer_global(question, ctx, cfg.global());
      global_events(r, out.events);
      out.answer = r.answer;
      out.found = r.found;
      break;
    }
  }
  return out;
}

nlohmann::ordered_json usage_json(const UsageSnapshot& usage) {
  ojson stages = ojson::object();
  for (std::size_t i = 0; i < kUsageStageCount; ++i) {
    const auto& s = usage.stages[i];
    stages[std::string(to_string(static_cast<UsageStage>(i)))] = {
        {"calls", s.calls}, {"prompt_tokens", s.prompt_tokens}, {"completion_tokens", s.completion_tokens}};
  }
  const auto t = usage.total();
  return {{"stages", stages},
          {"total",
           {{"calls", t.calls}, {"prompt_tokens", t.prompt_tokens}, {"completion_tokens", t.completion_tokens}}}};
}

nlohmann::ordered_json EvalReport::to_json() const {
  return {{"mode", to_string(mode)},
          {"questions", questions},
          {"answered", answered},
          {"exact_match", exact_match},
          {"f1", f1},
          {"usage", usage_json(usage)}};
}

EvalReport run_eval(const std::vector<QARecord>& records, QueryMode mode, const QueryContext& ctx,
                    const RunConfig& cfg, const UsageLedger& ledger, std::ostream* log) {
  struct Row {
    QueryOutcome outcome;
    int em = 0;
    double f1 = 0.0;
  };
  std::vector<Row> rows(records.size());

  std::optional<std::vector<Community>> communities;
  if (mode == QueryMode::Global && !records.empty()) {
    communities = detect_communities(ctx.graph(), cfg.global().community_size, cfg.leiden);
  }
  const auto* comms = communities ? &*communities : nullptr;

  const auto work = [&](std::size_t i) {
    Row row;
    row.outcome = run_query(records[i].question, mode, ctx, cfg, comms);
    row.em = exact_match(row.outcome.answer, records[i].answers);
    row.f1 = f1_score(row.outcome.answer, records[i].answers);
    rows[i] = std::move(row);
  };
  const std::size_t workers = std::min(cfg.workers, std::max<std::size_t>(records.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < records.size(); i = next++) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = records.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EvalReport report;
  report.mode = mode;
  report.questions = records.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    report.exact_match += rows[i].em;
    report.f1 += rows[i].f1;
    report.answered += rows[i].outcome.found ? 1 : 0;
    if (log) {
      ojson line = {{"index", i},
                    {"question", records[i].question},
                    {"answers", records[i].answers},
                    {"prediction", rows[i].outcome.answer},
                    {"em", rows[i].em},
                    {"f1", rows[i].f1},
                    {"found", rows[i].outcome.found},
                    {"trace", rows[i].outcome.events}};
      *log << line.dump() << '\n';
    }
  }
  if (!rows.empty()) {
    report.exact_match /= static_cast<double>(rows.size());
    report.f1 /= static_cast<double>(rows.size());
  }
  report.usage = ledger.snapshot();
  return report;
}

}  // namespace propgraph
