#include "propgraph/llm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "propgraph/error.hpp"
#include "propgraph/text.hpp"

namespace propgraph {

namespace {

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) !=
        std::toupper(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool icontains(std::string_view hay, std::string_view needle) {
  return to_lower(hay).find(to_lower(needle)) != std::string::npos;
}

bool is_none(std::string_view s) {
  auto t = trim(s);
  while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
  return to_lower(t) == "none";
}

// "3. text" / "3) text" / "- text" -> "text"
std::optional<std::string> strip_item_marker(std::string_view line) {
  const auto t = trim(line);
  std::string_view v(t);
  if (v.starts_with("- ") || v.starts_with("* ")) return trim(v.substr(2));
  std::size_t i = 0;
  while (i < v.size() && std::isdigit(static_cast<unsigned char>(v[i]))) ++i;
  if (i == 0 || i >= v.size() || (v[i] != '.' && v[i] != ')')) return std::nullopt;
  return trim(v.substr(i + 1));
}

std::vector<std::string> split_trimmed(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    auto piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.append(sep);
    out += items[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsers

std::optional<std::vector<std::string>> parse_numbered_list(std::string_view text) {
  if (is_none(text)) return std::vector<std::string>{};
  std::vector<std::string> items;
  bool saw_none = false;
  for (const auto& line : split_lines(text)) {
    if (auto item = strip_item_marker(line)) {
      if (!item->empty()) items.push_back(std::move(*item));
    } else if (is_none(line)) {
      saw_none = true;
    }
  }
  if (items.empty() && !saw_none) return std::nullopt;
  return items;
}

std::optional<std::vector<ExtractedProposition>> parse_propositions(std::string_view text) {
  auto items = parse_numbered_list(text);
  if (!items) return std::nullopt;
  std::vector<ExtractedProposition> out;
  for (const auto& item : *items) {
    ExtractedProposition p;
    const auto bar = item.rfind('|');
    if (bar == std::string::npos) {
      p.text = trim(item);
    } else {
      p.text = trim(std::string_view(item).substr(0, bar));
      const auto tail = std::string_view(item).substr(bar + 1);
      if (!is_none(tail)) p.entities = split_trimmed(tail, ';');
    }
    if (!p.text.empty()) out.push_back(std::move(p));
  }
  return out;
}

std::optional<std::vector<std::size_t>> parse_relevant(std::string_view text, std::size_t count) {
  for (const auto& raw : split_lines(text)) {
    const auto line = trim(raw);
    if (!istarts_with(line, "RELEVANT:")) continue;
    const std::string_view rest = std::string_view(line).substr(9);
    if (is_none(rest)) return std::vector<std::size_t>{};
    std::vector<std::size_t> out;
    bool any = false;
    std::size_t i = 0;
    while (i < rest.size()) {
      if (!std::isdigit(static_cast<unsigned char>(rest[i]))) {
        ++i;
        continue;
      }
      std::size_t value = 0;
      const auto [ptr, ec] = std::from_chars(rest.data() + i, rest.data() + rest.size(), value);
      i = static_cast<std::size_t>(ptr - rest.data());
      if (ec != std::errc{}) continue;
      any = true;
      if (value >= 1 && value <= count) out.push_back(value - 1);
    }
    if (!any) return std::nullopt;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  return std::nullopt;
}

std::optional<EvalVerdict> parse_eval(std::string_view text) {
  for (const auto& raw : split_lines(text)) {
    const auto line = trim(raw);
    if (istarts_with(line, "ANSWER:")) {
      auto answer = trim(std::string_view(line).substr(7));
      if (answer.empty()) return std::nullopt;
      return EvalVerdict{true, std::move(answer)};
    }
  }
  if (icontains(text, "INSUFFICIENT")) return EvalVerdict{false, {}};
  return std::nullopt;
}

std::optional<IntermediaryAnswer> parse_intermediary(std::string_view text) {
  std::optional<int> score;
  std::optional<std::string> answer;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (!score && istarts_with(line, "SCORE:")) {
      const auto rest = trim(std::string_view(line).substr(6));
      int value = 0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec == std::errc{}) score = value;
    } else if (!answer && istarts_with(line, "ANSWER:")) {
      std::string body(std::string_view(line).substr(7));
      for (std::size_t j = i + 1; j < lines.size(); ++j) body += "\n" + lines[j];
      answer = trim(body);
      break;
    }
  }
  if (!score || !answer) return std::nullopt;
  return IntermediaryAnswer{std::move(*answer), *score};
}

// ---------------------------------------------------------------------------
// Gateway

template <typename Parse>
auto LlmGateway::complete_parsed(const PromptInstance& prompt, Parse parse) const
    -> decltype(parse(std::string_view{})) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto completion = chat_->complete(prompt);
    if (auto parsed = parse(std::string_view(completion))) return parsed;
    spdlog::warn("malformed {} completion (attempt {}): {:.120}", to_string(prompt.template_id),
                 attempt + 1, completion);
  }
  return std::nullopt;
}

std::vector<std::string> LlmGateway::extract_entities(const std::string& passage) const {
  const auto prompt = render_prompt(TemplateId::NER, {{"passage", passage}});
  auto items = complete_parsed(prompt, [](std::string_view t) { return parse_numbered_list(t); });
  if (!items) throw Error(ErrorCode::ExtractionFailed, "entity extraction output is malformed");
  std::vector<std::string> out;
  for (auto& e : *items) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
  }
  return out;
}

std::vector<ExtractedProposition> LlmGateway::extract_propositions(
    const std::string& passage, const std::vector<std::string>& entities) const {
  const auto prompt = render_prompt(
      TemplateId::Propositions,
      {{"passage", passage}, {"entities", entities.empty() ? "NONE" : join(entities, "; ")}});
  auto props = complete_parsed(prompt, [](std::string_view t) { return parse_propositions(t); });
  if (!props) throw Error(ErrorCode::ExtractionFailed, "proposition extraction output is malformed");
  for (auto& p : *props) {
    std::vector<std::string> kept;
    for (auto& name : p.entities) {
      if (std::find(entities.begin(), entities.end(), name) == entities.end()) {
        spdlog::warn("dropping entity '{}' not produced by NER", name);
        continue;
      }
      if (std::find(kept.begin(), kept.end(), name) == kept.end()) kept.push_back(std::move(name));
    }
    p.entities = std::move(kept);
  }
  return std::move(*props);
}

SelectVerdict LlmGateway::select_relevant(const std::string& query,
                                          const std::vector<std::string>& candidates) const {
  SelectVerdict v;
  if (candidates.empty()) return v;
  const auto prompt =
      render_prompt(TemplateId::Select, {{"query", query}, {"candidates", numbered(candidates)}});
  const std::size_t n = candidates.size();
  auto kept = complete_parsed(prompt, [n](std::string_view t) { return parse_relevant(t, n); });
  if (!kept) {
    kept.emplace();
    for (std::size_t i = 0; i < n; ++i) kept->push_back(i);
  }
  v.kept = std::move(*kept);
  for (std::size_t i = 0, j = 0; i < n; ++i) {
    if (j < v.kept.size() && v.kept[j] == i) {
      ++j;
    } else {
      v.pruned.push_back(i);
    }
  }
  return v;
}

EvalVerdict LlmGateway::evaluate_answerable(const std::string& question,
                                            const std::vector<std::string>& facts) const {
  if (facts.empty()) return {};
  const auto prompt =
      render_prompt(TemplateId::Eval, {{"question", question}, {"facts", numbered(facts)}});
  auto verdict = complete_parsed(prompt, [](std::string_view t) { return parse_eval(t); });
  return verdict.value_or(EvalVerdict{});
}

std::vector<std::string> LlmGateway::next_questions(const std::string& question,
                                                    const std::vector<std::string>& facts) const {
  const auto prompt = render_prompt(
      TemplateId::NextQ, {{"question", question},
                          {"facts", facts.empty() ? "NONE" : numbered(facts)},
                          {"max_questions", std::to_string(options_.max_subquestions)}});
  auto items = complete_parsed(prompt, [](std::string_view t) { return parse_numbered_list(t); });
  if (!items || items->empty()) return {question};
  if (items->size() > options_.max_subquestions) items->resize(options_.max_subquestions);
  return std::move(*items);
}

std::vector<std::string> LlmGateway::decompose(const std::string& question, std::size_t m) const {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "decompose needs m >= 1");
  const auto prompt =
      render_prompt(TemplateId::Decompose, {{"question", question}, {"m", std::to_string(m)}});
  auto items = complete_parsed(prompt, [](std::string_view t) { return parse_numbered_list(t); });
  std::vector<std::string> out = items ? std::move(*items) : std::vector<std::string>{};
  if (out.size() > m) out.resize(m);
  while (out.size() < m) out.push_back(question);
  return out;
}

IntermediaryAnswer LlmGateway::intermediary_answer(const std::string& question,
                                                   const std::string& chunk) const {
  const auto prompt =
      render_prompt(TemplateId::IntermediaryAnswer, {{"question", question}, {"chunk", chunk}});
  auto parsed = complete_parsed(prompt, [](std::string_view t) { return parse_intermediary(t); });
  if (!parsed) return {};
  parsed->score = std::clamp(parsed->score, 0, 100);
  return std::move(*parsed);
}

std::string LlmGateway::final_answer(const std::string& question,
                                     const std::vector<std::string>& context,
                                     AnswerStyle style) const {
  const auto prompt =
      style == AnswerStyle::Facts
          ? render_prompt(TemplateId::FinalAnswer,
                          {{"question", question}, {"context", numbered(context)}})
          : render_prompt(TemplateId::CombineAnswers,
                          {{"question", question}, {"reports", join(context, "\n\n")}});
  return trim(chat_->complete(prompt));
}

// ---------------------------------------------------------------------------
// Mock

namespace {

bool matcher_holds(const SlotMatcher& m, const SlotMap& slots) {
  const auto it = slots.find(m.slot);
  if (it == slots.end()) return false;
  return m.kind == SlotMatcher::Kind::Equals ? it->second == m.value
                                             : it->second.find(m.value) != std::string::npos;
}

bool is_capitalized(std::string_view w) {
  return !w.empty() && std::isupper(static_cast<unsigned char>(w.front()));
}

std::string strip_punct(std::string_view w) {
  std::size_t b = 0;
  std::size_t e = w.size();
  const auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (b < e && punct(w[b])) ++b;
  while (e > b && punct(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

std::vector<std::string> capitalized_runs(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string run;
  const auto flush = [&] {
    if (!run.empty() && std::find(out.begin(), out.end(), run) == out.end()) out.push_back(run);
    run.clear();
  };
  while (in >> raw) {
    const auto word = strip_punct(raw);
    const bool trailing_break = !raw.empty() && std::ispunct(static_cast<unsigned char>(raw.back())) &&
                                raw.back() != '\'';
    if (is_capitalized(word) && !is_stopword(to_lower(word))) {
      if (!run.empty()) run.push_back(' ');
      run += word;
      if (trailing_break) flush();
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string slot(const PromptInstance& p, const std::string& name) {
  const auto it = p.slots.find(name);
  return it == p.slots.end() ? std::string{} : it->second;
}

bool shares_content_word(std::string_view a, std::string_view b) {
  const auto wa = content_words(a);
  const auto wb = content_words(b);
  return std::any_of(wa.begin(), wa.end(), [&](const std::string& w) {
    return std::find(wb.begin(), wb.end(), w) != wb.end();
  });
}

std::string first_line(std::string_view text) {
  for (const auto& line : split_lines(text)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (auto item = strip_item_marker(t)) return *item;
    return t;
  }
  return {};
}

}  // namespace

MockChatBackend MockChatBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open mock fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return MockChatBackend(parse_rules(buf.str()));
}

std::vector<MockRule> MockChatBackend::parse_rules(std::string_view json_text) {
  std::vector<MockRule> rules;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& r : doc.at("rules")) {
      MockRule rule;
      const auto name = r.at("template").get<std::string>();
      const auto id = parse_template_id(name);
      if (!id) throw Error(ErrorCode::ConfigError, "unknown template '" + name + "' in mock rules");
      rule.template_id = *id;
      if (r.contains("match")) {
        for (const auto& [slot_name, cond] : r.at("match").items()) {
          SlotMatcher m;
          m.slot = slot_name;
          if (cond.is_string()) {
            m.kind = SlotMatcher::Kind::Contains;
            m.value = cond.get<std::string>();
          } else if (cond.contains("equals")) {
            m.kind = SlotMatcher::Kind::Equals;
            m.value = cond.at("equals").get<std::string>();
          } else {
            m.kind = SlotMatcher::Kind::Contains;
            m.value = cond.at("contains").get<std::string>();
          }
          rule.matchers.push_back(std::move(m));
        }
      }
      rule.completion = r.at("completion").get<std::string>();
      rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("mock rules: ") + e.what());
  }
  return rules;
}

std::string MockChatBackend::complete(const PromptInstance& prompt) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  for (const auto& rule : rules_) {
    if (rule.template_id != prompt.template_id) continue;
    if (std::all_of(rule.matchers.begin(), rule.matchers.end(),
                    [&](const SlotMatcher& m) { return matcher_holds(m, prompt.slots); })) {
      return rule.completion;
    }
  }
  return heuristic(prompt);
}

std::string MockChatBackend::heuristic(const PromptInstance& prompt) {
  switch (prompt.template_id) {
    case TemplateId::NER: {
      const auto ents = capitalized_runs(slot(prompt, "passage"));
      return ents.empty() ? "NONE" : numbered(ents);
    }
    case TemplateId::Propositions: {
      const auto passage = slot(prompt, "passage");
      const auto entity_slot = slot(prompt, "entities");
      const auto entities =
          is_none(entity_slot) ? std::vector<std::string>{} : split_trimmed(entity_slot, ';');
      std::vector<std::string> items;
      for (const auto& s : split_sentences(passage)) {
        std::string sentence = passage.substr(s.begin, s.end - s.begin);
        std::replace(sentence.begin(), sentence.end(), '|', ',');
        std::replace(sentence.begin(), sentence.end(), '\n', ' ');
        std::vector<std::string> mentioned;
        for (const auto& e : entities) {
          if (icontains(sentence, e)) mentioned.push_back(e);
        }
        items.push_back(mentioned.empty() ? sentence : sentence + " | " + join(mentioned, "; "));
      }
      return items.empty() ? "NONE" : numbered(items);
    }
    case TemplateId::Select: {
      const auto query = slot(prompt, "query");
      const auto cands = parse_numbered_list(slot(prompt, "candidates")).value_or(
          std::vector<std::string>{});
      std::vector<std::string> keep;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (shares_content_word(query, cands[i])) keep.push_back(std::to_string(i + 1));
      }
      return "RELEVANT: " + (keep.empty() ? std::string("NONE") : join(keep, ", "));
    }
    case TemplateId::Eval:
      return "INSUFFICIENT";
    case TemplateId::NextQ:
    case TemplateId::Decompose:
      return "1. " + slot(prompt, "question");
    case TemplateId::IntermediaryAnswer: {
      const auto question = slot(prompt, "question");
      for (const auto& line : split_lines(slot(prompt, "chunk"))) {
        const auto t = trim(line);
        if (!t.empty() && shares_content_word(question, t)) return "SCORE: 80\nANSWER: " + t;
      }
      return "SCORE: 0\nANSWER: ";
    }
    case TemplateId::FinalAnswer: {
      auto line = first_line(slot(prompt, "context"));
      return line.empty() ? "No answer available." : line;
    }
    case TemplateId::CombineAnswers: {
      auto line = first_line(slot(prompt, "reports"));
      return line.empty() ? "No answer available." : line;
    }
  }
  return {};
}

}  // namespace propgraph
