#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace propgraph {

enum class TemplateId {
  NER,
  Propositions,
  Select,
  Eval,
  NextQ,
  Decompose,
  FinalAnswer,
  IntermediaryAnswer,
  CombineAnswers,
};

std::string_view to_string(TemplateId id) noexcept;
std::optional<TemplateId> parse_template_id(std::string_view name) noexcept;

/// Version of the prompt catalog compiled into the library. Bump on any change
/// to a template text or to an output convention.
inline constexpr std::string_view kPromptCatalogVersion = "1";

using SlotMap = std::map<std::string, std::string>;

struct PromptInstance {
  TemplateId template_id = TemplateId::FinalAnswer;
  SlotMap slots;
  std::string rendered;
};

std::string_view prompt_template(TemplateId id) noexcept;
/// Slot names referenced by the template, in order of first appearance.
std::vector<std::string> template_slots(TemplateId id);
/// Fills every {{slot}} marker. Throws InvalidArgument for a missing or unknown slot.
PromptInstance render_prompt(TemplateId id, SlotMap slots);

/// "1. first\n2. second" (1-based).
std::string numbered(const std::vector<std::string>& items);

/// Chat-completion contract shared by the live and mock realizations.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Throws BackendUnavailable on transport failure.
  virtual std::string complete(const PromptInstance& prompt) = 0;
  virtual std::string model_name() const = 0;
};

// ---------------------------------------------------------------------------
// Output parsers. std::nullopt means the text does not follow the convention.

/// Items of a "1. item" list; "NONE" yields an empty list.
std::optional<std::vector<std::string>> parse_numbered_list(std::string_view text);

struct ExtractedProposition {
  std::string text;
  std::vector<std::string> entities;
  friend bool operator==(const ExtractedProposition&, const ExtractedProposition&) = default;
};
/// "1. statement | entity; entity" items; "NONE" yields an empty list.
std::optional<std::vector<ExtractedProposition>> parse_propositions(std::string_view text);

/// "RELEVANT: 1, 3" or "RELEVANT: NONE" -> zero-based indices below `count`.
std::optional<std::vector<std::size_t>> parse_relevant(std::string_view text, std::size_t count);

struct EvalVerdict {
  bool answerable = false;
  std::string answer;
};
/// "ANSWER: text" or "INSUFFICIENT".
std::optional<EvalVerdict> parse_eval(std::string_view text);

struct IntermediaryAnswer {
  std::string text;
  int score = 0;
  friend bool operator==(const IntermediaryAnswer&, const IntermediaryAnswer&) = default;
};
/// "SCORE: n" line plus "ANSWER: text" (text may continue on following lines).
std::optional<IntermediaryAnswer> parse_intermediary(std::string_view text);

// ---------------------------------------------------------------------------

struct SelectVerdict {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> pruned;
};

enum class AnswerStyle { Facts, Reports };

struct GatewayOptions {
  std::size_t max_subquestions = 3;
};

/// Typed prompt operations. Every parsed prompt is retried once on malformed
/// output before degrading to the documented fallback.
class LlmGateway {
 public:
  explicit LlmGateway(ChatBackend& chat, GatewayOptions options = {})
      : chat_(&chat), options_(options) {}

  ChatBackend& chat() const noexcept { return *chat_; }
  const GatewayOptions& options() const noexcept { return options_; }

  /// Throws ExtractionFailed when both attempts are malformed.
  std::vector<std::string> extract_entities(const std::string& passage) const;
  /// Entity lists are restricted to `entities`; other names are dropped.
  std::vector<ExtractedProposition> extract_propositions(
      const std::string& passage, const std::vector<std::string>& entities) const;
  /// Keeps everything when the output cannot be parsed.
  SelectVerdict select_relevant(const std::string& query,
                                const std::vector<std::string>& candidates) const;
  /// Insufficient for empty facts or unparseable output.
  EvalVerdict evaluate_answerable(const std::string& question,
                                  const std::vector<std::string>& facts) const;
  /// 1..max_subquestions questions; falls back to {question}.
  std::vector<std::string> next_questions(const std::string& question,
                                          const std::vector<std::string>& facts) const;
  /// Exactly m sub-queries, padded with the question or truncated.
  std::vector<std::string> decompose(const std::string& question, std::size_t m) const;
  /// Score in [0, 100]; ("", 0) when unparseable.
  IntermediaryAnswer intermediary_answer(const std::string& question,
                                         const std::string& chunk) const;
  /// Completion returned verbatim (trimmed of surrounding whitespace).
  std::string final_answer(const std::string& question, const std::vector<std::string>& context,
                           AnswerStyle style = AnswerStyle::Facts) const;

 private:
  template <typename Parse>
  auto complete_parsed(const PromptInstance& prompt, Parse parse) const
      -> decltype(parse(std::string_view{}));

  ChatBackend* chat_;
  GatewayOptions options_;
};

// ---------------------------------------------------------------------------
// Deterministic mock

/// Condition on one slot of a prompt.
struct SlotMatcher {
  enum class Kind { Equals, Contains };
  std::string slot;
  Kind kind = Kind::Contains;
  std::string value;
};

struct MockRule {
  TemplateId template_id = TemplateId::FinalAnswer;
  std::vector<SlotMatcher> matchers;
  std::string completion;
};

/// Pure function of the prompt: the first rule whose template and matchers all
/// hold supplies the completion, otherwise a built-in heuristic answers.
///
/// Built-in heuristics:
///   NER            runs of capitalized words
///   Propositions   one proposition per sentence with the entities it mentions
///   Select         keep candidates sharing a content word with the query
///   Eval           INSUFFICIENT
///   NextQ          the question itself
///   Decompose      the question itself (the gateway pads to m)
///   Intermediary   score 80 and the first matching chunk line if the chunk shares
///                  a content word with the question, else score 0
///   Final/Combine  the first context line
///
/// Fixture file (JSON):
///   {"rules": [{"template": "Eval",
///               "match": {"facts": {"contains": "Belgravia"}},
///               "completion": "ANSWER: Belgravia"}]}
class MockChatBackend final : public ChatBackend {
 public:
  MockChatBackend() = default;
  explicit MockChatBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

  static MockChatBackend from_file(const std::filesystem::path& path);
  static std::vector<MockRule> parse_rules(std::string_view json_text);

  void add_rule(MockRule rule) { rules_.push_back(std::move(rule)); }

  std::string complete(const PromptInstance& prompt) override;
  std::string model_name() const override { return "mock"; }

  std::size_t calls() const noexcept { return calls_.load(); }

  /// The heuristic answer used when no rule matches.
  static std::string heuristic(const PromptInstance& prompt);

 private:
  std::vector<MockRule> rules_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace propgraph
