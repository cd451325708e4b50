#include "propgraph/http_backends.hpp"

#include <algorithm>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "propgraph/error.hpp"

namespace propgraph {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // /v1
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "base_url needs a scheme: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

nlohmann::json post_json(const HttpEndpoint& ep, const std::string& path,
                         const nlohmann::json& body) {
  const auto url = split_url(ep.base_url);
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client client(url.origin);
    client.set_connection_timeout(ep.timeout);
    client.set_read_timeout(ep.timeout);
    client.set_write_timeout(ep.timeout);
    httplib::Headers headers;
    if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);
    auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("bad JSON body: ") + e.what();
      }
    }
    spdlog::warn("{}{} attempt {} failed: {}", ep.base_url, path, attempt + 1, last_error);
  }
  throw Error(ErrorCode::BackendUnavailable, ep.base_url + path + ": " + last_error);
}

std::unique_ptr<std::counting_semaphore<>> make_slots(std::size_t n) {
  return std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(std::max<std::size_t>(n, 1)));
}

}  // namespace

OpenAiChatBackend::OpenAiChatBackend(HttpEndpoint endpoint, double temperature)
    : endpoint_(std::move(endpoint)), temperature_(temperature),
      slots_(make_slots(endpoint_.max_concurrency)) {
  split_url(endpoint_.base_url);
}

OpenAiChatBackend::~OpenAiChatBackend() = default;

std::string OpenAiChatBackend::complete(const PromptInstance& prompt) {
  const nlohmann::json body = {
      {"model", endpoint_.model},
      {"temperature", temperature_},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.rendered}}})},
  };
  SlotGuard guard(*slots_);
  const auto reply = post_json(endpoint_, "/chat/completions", body);
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("unexpected chat reply: ") + e.what());
  }
}

OpenAiEmbedBackend::OpenAiEmbedBackend(HttpEndpoint endpoint, std::size_t dimension,
                                       std::size_t batch_size)
    : endpoint_(std::move(endpoint)), dimension_(dimension),
      batch_size_(std::max<std::size_t>(batch_size, 1)),
      slots_(make_slots(endpoint_.max_concurrency)) {
  split_url(endpoint_.base_url);
}

OpenAiEmbedBackend::~OpenAiEmbedBackend() = default;

std::vector<Embedding> OpenAiEmbedBackend::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto end = std::min(texts.size(), start + batch_size_);
    std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    for (auto& v : embed_batch(batch)) out.push_back(std::move(v));
  }
  return out;
}

std::vector<Embedding> OpenAiEmbedBackend::embed_batch(const std::vector<std::string>& texts) {
  const nlohmann::json body = {{"model", endpoint_.model}, {"input", texts}};
  SlotGuard guard(*slots_);
  const auto reply = post_json(endpoint_, "/embeddings", body);
  std::vector<Embedding> out(texts.size());
  std::vector<bool> seen(texts.size(), false);
  try {
    const auto& data = reply.at("data");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
      if (index >= texts.size() || seen[index]) {
        throw Error(ErrorCode::BackendUnavailable, "embedding reply has a bad index");
      }
      const auto raw = item.at("embedding").get<std::vector<double>>();
      if (raw.size() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding dimension " + std::to_string(raw.size()) + ", expected " +
                        std::to_string(dimension_));
      }
      out[index] = normalized(std::span<const double>(raw));
      seen[index] = true;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("unexpected embedding reply: ") + e.what());
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::BackendUnavailable, "embedding reply is missing vectors");
  }
  return out;
}

}  // namespace propgraph
