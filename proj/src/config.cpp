#include "propgraph/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "propgraph/error.hpp"
#include "propgraph/http_backends.hpp"

namespace propgraph {

namespace {

using json = nlohmann::json;

template <typename T>
void read(const json& j, T& out) {
  out = j.get<T>();
}

void read_size(const json& j, std::size_t& out) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorCode::ConfigError, "expected a non-negative integer, got " + j.dump());
  }
  out = j.get<std::size_t>();
}

void read_backend(const json& j, BackendConfig& b, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  const std::map<std::string, std::function<void(const json&)>> fields = {
      {"kind", [&](const json& v) { read(v, b.kind); }},
      {"fixture", [&](const json& v) { read(v, b.fixture); }},
      {"base_url", [&](const json& v) { read(v, b.base_url); }},
      {"model", [&](const json& v) { read(v, b.model); }},
      {"api_key_env", [&](const json& v) { read(v, b.api_key_env); }},
      {"max_concurrency", [&](const json& v) { read_size(v, b.max_concurrency); }},
      {"timeout_seconds", [&](const json& v) { read_size(v, b.timeout_seconds); }},
      {"temperature", [&](const json& v) { read(v, b.temperature); }},
      {"dimension", [&](const json& v) { read_size(v, b.dimension); }},
      {"batch_size", [&](const json& v) { read_size(v, b.batch_size); }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorCode::ConfigError, "unknown key " + where + "." + key);
    it->second(value);
  }
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

HttpEndpoint endpoint(const BackendConfig& b) {
  HttpEndpoint ep;
  ep.base_url = b.base_url;
  ep.model = b.model;
  ep.max_concurrency = b.max_concurrency;
  ep.timeout = std::chrono::seconds(b.timeout_seconds);
  if (!b.api_key_env.empty()) {
    if (const char* key = std::getenv(b.api_key_env.c_str())) ep.api_key = key;
  }
  if (ep.base_url.empty() || ep.model.empty()) {
    throw Error(ErrorCode::ConfigError, "openai backends need base_url and model");
  }
  return ep;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    const auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    const std::map<std::string, std::function<void(const json&)>> fields = {
        {"lambda", [&](const json& v) { read(v, c.walk.lambda); }},
        {"damping", [&](const json& v) { read(v, c.walk.damping); }},
        {"cosine_threshold", [&](const json& v) { read(v, c.walk.theta); }},
        {"temperature", [&](const json& v) { read(v, c.walk.tau); }},
        {"ppr_epsilon", [&](const json& v) { read(v, c.walk.ppr_epsilon); }},
        {"ppr_max_iters", [&](const json& v) { read(v, c.walk.ppr_max_iters); }},
        {"subgraph_max_size", [&](const json& v) { read_size(v, c.subgraph_max_size); }},
        {"top_k", [&](const json& v) { read_size(v, c.top_k); }},
        {"max_iter", [&](const json& v) { read_size(v, c.max_iter); }},
        {"max_subquestions", [&](const json& v) { read_size(v, c.max_subquestions); }},
        {"breadth_m", [&](const json& v) { read_size(v, c.breadth_m); }},
        {"min_facts", [&](const json& v) { read_size(v, c.min_facts); }},
        {"global_max_iter", [&](const json& v) { read_size(v, c.global_max_iter); }},
        {"node_budget", [&](const json& v) { read_size(v, c.node_budget); }},
        {"min_community_size", [&](const json& v) { read_size(v, c.min_community_size); }},
        {"max_community_size", [&](const json& v) { read_size(v, c.max_community_size); }},
        {"rocchio_alpha", [&](const json& v) { read(v, c.rocchio.alpha); }},
        {"rocchio_beta", [&](const json& v) { read(v, c.rocchio.beta); }},
        {"rocchio_gamma", [&](const json& v) { read(v, c.rocchio.gamma); }},
        {"max_tokens_report", [&](const json& v) { read_size(v, c.max_tokens_report); }},
        {"passage_token_limit", [&](const json& v) { read_size(v, c.passage_token_limit); }},
        {"max_tokens_community_chunks",
         [&](const json& v) { read_size(v, c.max_tokens_community_chunks); }},
        {"chunk_target_tokens", [&](const json& v) { read_size(v, c.chunking.target_tokens); }},
        {"chunk_overlap_tokens", [&](const json& v) { read_size(v, c.chunking.overlap_tokens); }},
        {"synonym_threshold", [&](const json& v) { read(v, c.reconciliation.synonym_threshold); }},
        {"leiden_seed", [&](const json& v) { read(v, c.leiden.seed); }},
        {"leiden_resolution", [&](const json& v) { read(v, c.leiden.resolution); }},
        {"workers", [&](const json& v) { read_size(v, c.workers); }},
        {"backends",
         [&](const json& v) {
           if (!v.is_object()) throw Error(ErrorCode::ConfigError, "backends must be an object");
           for (const auto& [name, b] : v.items()) {
             if (name == "chat") {
               read_backend(b, c.chat, "backends.chat");
             } else if (name == "embed") {
               read_backend(b, c.embed, "backends.embed");
             } else {
               throw Error(ErrorCode::ConfigError, "unknown key backends." + name);
             }
           }
         }},
    };
    for (const auto& [key, value] : doc.items()) {
      const auto it = fields.find(key);
      if (it == fields.end()) throw Error(ErrorCode::ConfigError, "unknown key " + key);
      it->second(value);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return parse(read_text(path), path.parent_path());
}

void RunConfig::validate() const {
  try {
    local().validate();
    global().validate();
    chunking.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (!(reconciliation.synonym_threshold >= 0.0 && reconciliation.synonym_threshold <= 1.0)) {
    bad("synonym_threshold must lie in [0, 1]");
  }
  if (max_subquestions == 0) bad("max_subquestions must be >= 1");
  if (!(leiden.resolution > 0.0)) bad("leiden_resolution must be positive");
  if (workers == 0) bad("workers must be >= 1");
  for (const auto* b : {&chat, &embed}) {
    if (b->kind != "mock" && b->kind != "openai") bad("backend kind must be mock or openai");
    if (b->max_concurrency == 0) bad("max_concurrency must be >= 1");
  }
  if (embed.dimension == 0) bad("embedding dimension must be >= 1");
}

SuggestConfig RunConfig::suggest() const { return {top_k, subgraph_max_size, walk}; }

LocalRunConfig RunConfig::local() const { return {max_iter, suggest()}; }

GlobalRunConfig RunConfig::global() const {
  GlobalRunConfig g;
  g.breadth_m = breadth_m;
  g.min_facts = min_facts;
  g.max_iter = global_max_iter;
  g.node_budget = node_budget;
  g.community_size = {min_community_size, max_community_size};
  g.rocchio = rocchio;
  g.max_tokens_report = max_tokens_report;
  g.passage_token_limit = passage_token_limit;
  g.max_tokens_community_chunks = max_tokens_community_chunks;
  g.suggest = suggest();
  g.leiden = leiden;
  return g;
}

IndexingOptions RunConfig::indexing() const { return {chunking, reconciliation, workers}; }

GatewayOptions RunConfig::gateway() const { return {max_subquestions}; }

std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& cfg) {
  if (cfg.chat.kind == "openai") {
    return std::make_unique<OpenAiChatBackend>(endpoint(cfg.chat), cfg.chat.temperature);
  }
  if (cfg.chat.fixture.empty()) return std::make_unique<MockChatBackend>();
  std::filesystem::path p(cfg.chat.fixture);
  if (p.is_relative()) p = cfg.base_dir / p;
  return std::make_unique<MockChatBackend>(MockChatBackend::parse_rules(read_text(p)));
}

std::unique_ptr<EmbedBackend> make_embed_backend(const RunConfig& cfg) {
  if (cfg.embed.kind == "openai") {
    return std::make_unique<OpenAiEmbedBackend>(endpoint(cfg.embed), cfg.embed.dimension,
                                                cfg.embed.batch_size);
  }
  return std::make_unique<MockEmbedBackend>(cfg.embed.dimension);
}

}  // namespace propgraph
