#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <string_view>

#include "propgraph/llm.hpp"

namespace propgraph {

enum class UsageStage { Index, Select, Eval, Answer };
inline constexpr std::size_t kUsageStageCount = 4;

std::string_view to_string(UsageStage stage) noexcept;
/// NER/Propositions -> Index, Select/Decompose -> Select, Eval/NextQ -> Eval,
/// answer synthesis -> Answer.
UsageStage stage_of(TemplateId id) noexcept;

struct StageUsage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t calls = 0;
  friend bool operator==(const StageUsage&, const StageUsage&) = default;
};

struct UsageSnapshot {
  std::array<StageUsage, kUsageStageCount> stages{};

  const StageUsage& operator[](UsageStage s) const { return stages[static_cast<std::size_t>(s)]; }
  StageUsage total() const;
  friend bool operator==(const UsageSnapshot&, const UsageSnapshot&) = default;
};

/// Monotone token counters, safe to bump from concurrent requests.
class UsageLedger {
 public:
  void record(UsageStage stage, std::size_t prompt_tokens, std::size_t completion_tokens);
  UsageSnapshot snapshot() const;

 private:
  struct Counters {
    std::atomic<std::size_t> prompt{0};
    std::atomic<std::size_t> completion{0};
    std::atomic<std::size_t> calls{0};
  };
  std::array<Counters, kUsageStageCount> counters_;
};

/// Forwards to another backend and books estimated token counts per stage.
class MeteredChat final : public ChatBackend {
 public:
  MeteredChat(ChatBackend& inner, UsageLedger& ledger) : inner_(&inner), ledger_(&ledger) {}

  std::string complete(const PromptInstance& prompt) override;
  std::string model_name() const override { return inner_->model_name(); }

 private:
  ChatBackend* inner_;
  UsageLedger* ledger_;
};

}  // namespace propgraph
