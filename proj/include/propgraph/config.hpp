#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "propgraph/encoding.hpp"
#include "propgraph/global_mode.hpp"
#include "propgraph/indexing.hpp"
#include "propgraph/llm.hpp"
#include "propgraph/local_mode.hpp"

namespace propgraph {

struct BackendConfig {
  std::string kind = "mock";  // "mock" or "openai"
  /// mock chat: rule file, relative paths resolve against the config file.
  std::string fixture;
  std::string base_url;
  std::string model;
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env;
  std::size_t max_concurrency = 4;
  std::size_t timeout_seconds = 120;
  /// chat only
  double temperature = 0.0;
  /// embed only
  std::size_t dimension = kMockEmbeddingDimension;
  std::size_t batch_size = 64;
};

/// Every tunable of a run. JSON keys are listed in keys(); unknown keys are rejected.
struct RunConfig {
  WalkParams walk;
  std::size_t top_k = 20;
  std::size_t subgraph_max_size = 500;
  std::size_t max_iter = 3;
  std::size_t max_subquestions = 3;
  std::size_t breadth_m = 10;
  std::size_t min_facts = 200;
  std::size_t global_max_iter = 5;
  std::size_t node_budget = 8000;
  std::size_t min_community_size = 10;
  std::size_t max_community_size = 150;
  RocchioWeights rocchio;
  std::size_t max_tokens_report = 8000;
  std::size_t passage_token_limit = 500;
  std::size_t max_tokens_community_chunks = 8000;
  ChunkingPolicy chunking;
  ReconciliationPolicy reconciliation;
  LeidenOptions leiden;
  std::size_t workers = 1;
  BackendConfig chat;
  BackendConfig embed;

  std::filesystem::path base_dir;

  static RunConfig parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  SuggestConfig suggest() const;
  LocalRunConfig local() const;
  GlobalRunConfig global() const;
  IndexingOptions indexing() const;
  GatewayOptions gateway() const;
};

std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& cfg);
std::unique_ptr<EmbedBackend> make_embed_backend(const RunConfig& cfg);

}  // namespace propgraph
