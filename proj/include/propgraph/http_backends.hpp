#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>

#include "propgraph/encoding.hpp"
#include "propgraph/llm.hpp"

namespace propgraph {

/// Connection settings for an OpenAI-compatible server. `base_url` includes the
/// API prefix, e.g. "http://localhost:8000/v1".
struct HttpEndpoint {
  std::string base_url;
  std::string model;
  std::string api_key;
  std::size_t max_concurrency = 4;
  std::chrono::seconds timeout{120};
};

/// POST {base_url}/chat/completions with a single user message at temperature 0.
/// A failed transport or non-2xx status is retried once, then BackendUnavailable.
class OpenAiChatBackend final : public ChatBackend {
 public:
  explicit OpenAiChatBackend(HttpEndpoint endpoint, double temperature = 0.0);
  ~OpenAiChatBackend() override;

  std::string complete(const PromptInstance& prompt) override;
  std::string model_name() const override { return endpoint_.model; }

 private:
  HttpEndpoint endpoint_;
  double temperature_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

/// POST {base_url}/embeddings; vectors are normalized on receipt.
class OpenAiEmbedBackend final : public EmbedBackend {
 public:
  OpenAiEmbedBackend(HttpEndpoint endpoint, std::size_t dimension, std::size_t batch_size = 64);
  ~OpenAiEmbedBackend() override;

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);

  HttpEndpoint endpoint_;
  std::size_t dimension_;
  std::size_t batch_size_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace propgraph
