#include "propgraph/usage.hpp"

#include "propgraph/text.hpp"

namespace propgraph {

std::string_view to_string(UsageStage stage) noexcept {
  switch (stage) {
    case UsageStage::Index: return "index";
    case UsageStage::Select: return "select";
    case UsageStage::Eval: return "eval";
    case UsageStage::Answer: return "answer";
  }
  return "?";
}

UsageStage stage_of(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::NER:
    case TemplateId::Propositions:
      return UsageStage::Index;
    case TemplateId::Select:
    case TemplateId::Decompose:
      return UsageStage::Select;
    case TemplateId::Eval:
    case TemplateId::NextQ:
      return UsageStage::Eval;
    case TemplateId::FinalAnswer:
    case TemplateId::IntermediaryAnswer:
    case TemplateId::CombineAnswers:
      return UsageStage::Answer;
  }
  return UsageStage::Answer;
}

StageUsage UsageSnapshot::total() const {
  StageUsage t;
  for (const auto& s : stages) {
    t.prompt_tokens += s.prompt_tokens;
    t.completion_tokens += s.completion_tokens;
    t.calls += s.calls;
  }
  return t;
}

void UsageLedger::record(UsageStage stage, std::size_t prompt_tokens,
                         std::size_t completion_tokens) {
  auto& c = counters_[static_cast<std::size_t>(stage)];
  c.prompt.fetch_add(prompt_tokens, std::memory_order_relaxed);
  c.completion.fetch_add(completion_tokens, std::memory_order_relaxed);
  c.calls.fetch_add(1, std::memory_order_relaxed);
}

UsageSnapshot UsageLedger::snapshot() const {
  UsageSnapshot s;
  for (std::size_t i = 0; i < kUsageStageCount; ++i) {
    s.stages[i] = {counters_[i].prompt.load(), counters_[i].completion.load(),
                   counters_[i].calls.load()};
  }
  return s;
}

std::string MeteredChat::complete(const PromptInstance& prompt) {
  auto out = inner_->complete(prompt);
  ledger_->record(stage_of(prompt.template_id), estimate_tokens(prompt.rendered),
                  estimate_tokens(out));
  return out;
}

}  // namespace propgraph
