// Prompt catalog, version kPromptCatalogVersion.
//
// Every template ends with an output convention that the parsers in llm.cpp
// understand: numbered items, "RELEVANT:", "ANSWER:"/"INSUFFICIENT", "SCORE:".

#include <algorithm>

#include "propgraph/error.hpp"
#include "propgraph/llm.hpp"

namespace propgraph {

namespace {

constexpr std::string_view kNer = R"(You extract named entities from a passage.
List every named entity (people, organizations, places, works, events, dates, products, concepts with proper names) that appears in the passage. Use the surface form written in the passage. Do not invent entities.

Example
Passage: Marie Curie received the Nobel Prize in Physics in 1903 together with Pierre Curie.
Entities:
1. Marie Curie
2. Nobel Prize in Physics
3. 1903
4. Pierre Curie

Example
Passage: it rained all afternoon and the streets were quiet.
Entities:
NONE

Passage: {{passage}}
Answer with one entity per line as a numbered list, or NONE.
Entities:
)";

constexpr std::string_view kPropositions = R"(You decompose a passage into propositions.
A proposition is an atomic, self-contained factual statement: it expresses a single fact, it can be understood without the passage (replace pronouns with the names they refer to), and it keeps the original meaning.
For each proposition, list the entities from the given entity list that it mentions.

Example
Passage: Marie Curie received the Nobel Prize in Physics in 1903. She shared it with Pierre Curie.
Entities: Marie Curie; Nobel Prize in Physics; 1903; Pierre Curie
Propositions:
1. Marie Curie received the Nobel Prize in Physics in 1903. | Marie Curie; Nobel Prize in Physics; 1903
2. Marie Curie shared the Nobel Prize in Physics with Pierre Curie. | Marie Curie; Nobel Prize in Physics; Pierre Curie

Passage: {{passage}}
Entities: {{entities}}
Answer with one proposition per line as "N. statement | entity; entity", or NONE.
Propositions:
)";

constexpr std::string_view kSelect = R"(You filter facts for relevance.
Question: {{query}}

Candidate facts:
{{candidates}}

Keep the facts that help answer the question directly or provide a necessary step towards the answer (for example a fact about an intermediate entity). Discard unrelated facts.
Answer with a single line "RELEVANT: " followed by the comma-separated numbers of the facts to keep, or "RELEVANT: NONE".
)";

constexpr std::string_view kEval = R"(You decide whether a question can be answered from the facts below.
Question: {{question}}

Facts:
{{facts}}

If the facts are sufficient, answer with a single line "ANSWER: " followed by a short answer (a few words, no explanation).
If they are not sufficient, answer with the single word INSUFFICIENT.
)";

constexpr std::string_view kNextQ = R"(The facts below are not sufficient to answer the question.
Question: {{question}}

Facts collected so far:
{{facts}}

Write at most {{max_questions}} short, targeted sub-questions whose answers would fill the missing links. Each sub-question must stand on its own.
Answer with a numbered list, one sub-question per line.
)";

constexpr std::string_view kDecompose = R"(You decompose a broad question into {{m}} complementary sub-questions.
Each sub-question covers a different facet, aspect or perspective of the original question, and together they span the topic as widely as possible.

Question: {{question}}

Answer with a numbered list of {{m}} sub-questions, one per line.
)";

constexpr std::string_view kFinalAnswer = R"(Answer the question using the facts below.
Question: {{question}}

Facts:
{{context}}

Give a short answer (a few words). If the facts do not contain the answer, give your best guess.
Answer:
)";

constexpr std::string_view kIntermediary = R"(You read part of a knowledge base and write an intermediate answer to a question.
Question: {{question}}

Content:
{{chunk}}

First rate how useful this content is for answering the question on a scale from 0 (useless) to 100 (essential). Then write an answer based only on the content.
Answer with a line "SCORE: n" followed by a line "ANSWER: " and the answer text.
)";

constexpr std::string_view kCombine = R"(You write a comprehensive final answer from intermediate reports.
Question: {{question}}

Reports (the most relevant ones come first and last):
{{reports}}

Combine the reports into a single well-structured answer that covers the different aspects of the question. Do not mention the reports themselves.
Answer:
)";

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::NER: return "NER";
    case TemplateId::Propositions: return "Propositions";
    case TemplateId::Select: return "Select";
    case TemplateId::Eval: return "Eval";
    case TemplateId::NextQ: return "NextQ";
    case TemplateId::Decompose: return "Decompose";
    case TemplateId::FinalAnswer: return "FinalAnswer";
    case TemplateId::IntermediaryAnswer: return "IntermediaryAnswer";
    case TemplateId::CombineAnswers: return "CombineAnswers";
  }
  return "?";
}

std::optional<TemplateId> parse_template_id(std::string_view name) noexcept {
  for (auto id : {TemplateId::NER, TemplateId::Propositions, TemplateId::Select, TemplateId::Eval,
                  TemplateId::NextQ, TemplateId::Decompose, TemplateId::FinalAnswer,
                  TemplateId::IntermediaryAnswer, TemplateId::CombineAnswers}) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

std::string_view prompt_template(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::NER: return kNer;
    case TemplateId::Propositions: return kPropositions;
    case TemplateId::Select: return kSelect;
    case TemplateId::Eval: return kEval;
    case TemplateId::NextQ: return kNextQ;
    case TemplateId::Decompose: return kDecompose;
    case TemplateId::FinalAnswer: return kFinalAnswer;
    case TemplateId::IntermediaryAnswer: return kIntermediary;
    case TemplateId::CombineAnswers: return kCombine;
  }
  return {};
}

std::vector<std::string> template_slots(TemplateId id) {
  const auto text = prompt_template(id);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto close = text.find("}}", pos);
    if (close == std::string_view::npos) break;
    std::string name(text.substr(pos + 2, close - pos - 2));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    pos = close + 2;
  }
  return out;
}

PromptInstance render_prompt(TemplateId id, SlotMap slots) {
  const auto text = prompt_template(id);
  const auto names = template_slots(id);
  for (const auto& [name, value] : slots) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "template " + std::string(to_string(id)) + " has no slot '" + name + "'");
    }
  }
  std::string rendered;
  rendered.reserve(text.size() + 256);
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      rendered.append(text.substr(pos));
      break;
    }
    const auto close = text.find("}}", open);
    rendered.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    const auto it = slots.find(name);
    if (it == slots.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "template " + std::string(to_string(id)) + " slot '" + name + "' is unfilled");
    }
    rendered.append(it->second);
    pos = close + 2;
  }
  return {id, std::move(slots), std::move(rendered)};
}

std::string numbered(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back('\n');
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

}  // namespace propgraph
