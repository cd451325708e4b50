#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "propgraph/config.hpp"
#include "propgraph/usage.hpp"

namespace propgraph {

/// Lowercase, drop punctuation and the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);
int exact_match(std::string_view prediction, const std::vector<std::string>& golds);
double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

enum class QueryMode { Naive, Local, Global };
std::string_view to_string(QueryMode mode) noexcept;
std::optional<QueryMode> parse_query_mode(std::string_view name) noexcept;

struct QARecord {
  std::string question;
  std::vector<std::string> answers;
};

/// JSONL with "question" and "answers" (list of strings). Throws CorruptFile.
std::vector<QARecord> load_dataset(const std::filesystem::path& path);

struct QueryOutcome {
  std::string answer;
  bool found = false;
  /// Line-delimited trace events of the run, one JSON object each.
  std::vector<nlohmann::ordered_json> events;
};

/// Runs one question in the requested mode and records its trace events.
QueryOutcome run_query(const std::string& question, QueryMode mode, const QueryContext& ctx,
                       const RunConfig& cfg, const std::vector<Community>* communities = nullptr);

struct EvalReport {
  QueryMode mode = QueryMode::Local;
  std::size_t questions = 0;
  double exact_match = 0.0;
  double f1 = 0.0;
  std::size_t answered = 0;
  UsageSnapshot usage;

  nlohmann::ordered_json to_json() const;
};

/// Answers every record (cfg.workers at a time), writes one log line per
/// question in dataset order to `log` when given, and aggregates mean EM / F1.
/// `ledger` is read for the usage totals; callers meter their backends with it.
EvalReport run_eval(const std::vector<QARecord>& records, QueryMode mode, const QueryContext& ctx,
                    const RunConfig& cfg, const UsageLedger& ledger, std::ostream* log = nullptr);

nlohmann::ordered_json usage_json(const UsageSnapshot& usage);

}  // namespace propgraph
