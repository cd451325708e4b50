#include "propgraph/indexing.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "propgraph/error.hpp"

namespace propgraph {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Unit {
  std::size_t begin;
  std::size_t end;
};

// Sentences, with any sentence over the target cut into word runs that fit.
std::vector<Unit> chunk_units(std::string_view text, std::size_t target, const TokenCounter& count) {
  std::vector<Unit> units;
  for (const auto& s : split_sentences(text)) {
    if (count(text.substr(s.begin, s.end - s.begin)) <= target) {
      units.push_back({s.begin, s.end});
      continue;
    }
    std::vector<Unit> words;
    for (std::size_t i = s.begin; i < s.end;) {
      while (i < s.end && is_space(text[i])) ++i;
      if (i >= s.end) break;
      const std::size_t b = i;
      while (i < s.end && !is_space(text[i])) ++i;
      words.push_back({b, i});
    }
    std::size_t w = 0;
    while (w < words.size()) {
      std::size_t e = w + 1;
      while (e < words.size() &&
             count(text.substr(words[w].begin, words[e].end - words[w].begin)) <= target) {
        ++e;
      }
      units.push_back({words[w].begin, words[e - 1].end});
      w = e;
    }
  }
  return units;
}

struct Extraction {
  bool failed = false;
  std::vector<ExtractedProposition> propositions;
  std::vector<Embedding> proposition_vecs;
  std::vector<std::string> surfaces;  // distinct referenced surfaces, first-mention order
  std::vector<Embedding> surface_vecs;
};

Extraction extract_passage(const std::string& text, const LlmGateway& gateway,
                           EmbedBackend& embed) {
  Extraction out;
  try {
    const auto entities = gateway.extract_entities(text);
    out.propositions = gateway.extract_propositions(text, entities);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ExtractionFailed) throw;
    spdlog::warn("extraction failed, passage kept without propositions: {}", e.what());
    out.failed = true;
    out.propositions.clear();
    return out;
  }
  std::vector<std::string> texts;
  for (const auto& p : out.propositions) {
    texts.push_back(p.text);
    for (const auto& s : p.entities) {
      if (std::find(out.surfaces.begin(), out.surfaces.end(), s) == out.surfaces.end()) {
        out.surfaces.push_back(s);
      }
    }
  }
  if (!texts.empty()) out.proposition_vecs = embed.embed(texts);
  if (!out.surfaces.empty()) out.surface_vecs = embed.embed(out.surfaces);
  return out;
}

}  // namespace

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path) {
  std::vector<CorpusDocument> docs;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.filename().string(), read_file(f)});
  } else {
    const auto body = read_file(path);
    std::size_t line_no = 0;
    for (const auto& line : split_lines(body)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        docs.push_back({j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptFile,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  std::set<std::string> ids;
  for (const auto& d : docs) {
    if (!ids.insert(d.doc_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate doc_id " + d.doc_id);
    }
  }
  return docs;
}

void ChunkingPolicy::validate() const {
  if (target_tokens == 0) throw Error(ErrorCode::InvalidArgument, "chunk target must be positive");
  if (overlap_tokens >= target_tokens) {
    throw Error(ErrorCode::InvalidArgument, "chunk overlap must be below the target");
  }
}

std::vector<Chunk> chunk(const CorpusDocument& doc, const ChunkingPolicy& policy,
                         const TokenCounter& count) {
  policy.validate();
  const std::string_view text(doc.text);
  const auto units = chunk_units(text, policy.target_tokens, count);
  const auto tokens = [&](std::size_t a, std::size_t b) {  // units [a, b]
    return count(text.substr(units[a].begin, units[b].end - units[a].begin));
  };

  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last)
  std::size_t i = 0;
  while (i < units.size()) {
    std::size_t j = i + 1;
    while (j < units.size() && tokens(i, j) <= policy.target_tokens) ++j;
    groups.emplace_back(i, j);
    if (j >= units.size()) break;
    std::size_t next = j;
    if (policy.overlap_tokens > 0) {
      while (next - 1 > i && tokens(next - 1, j - 1) <= policy.overlap_tokens) --next;
    }
    i = next;
  }

  std::vector<Chunk> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [first, last] = groups[g];
    CharSpan span;
    const bool final_group = g + 1 == groups.size();
    if (policy.overlap_tokens == 0) {
      span.begin = g == 0 ? 0 : out.back().span.end;
      span.end = final_group ? text.size() : units[groups[g + 1].first].begin;
    } else {
      span.begin = g == 0 ? 0 : units[first].begin;
      span.end = final_group ? text.size() : units[last - 1].end;
    }
    out.push_back({trim(text.substr(span.begin, span.end - span.begin)), span});
  }
  return out;
}

std::optional<std::size_t> EntityReconciler::lookup(const std::string& surface) const {
  const auto key = to_lower(surface);
  for (const auto& [name, index] : names_) {
    if (name == key) return index;
  }
  return std::nullopt;
}

std::size_t EntityReconciler::reconcile(const std::string& surface, EmbeddingView embedding) {
  std::optional<std::size_t> hit = lookup(surface);
  if (!hit) {
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      if (cosine(embedding, entities_[i].embedding) >= policy_.synonym_threshold) {
        hit = i;
        break;
      }
    }
  }
  if (!hit) {
    entities_.push_back({surface, {surface}, Embedding(embedding.begin(), embedding.end())});
    names_.emplace_back(to_lower(surface), entities_.size() - 1);
    return entities_.size() - 1;
  }
  auto& aliases = entities_[*hit].aliases;
  if (std::find(aliases.begin(), aliases.end(), surface) == aliases.end()) {
    aliases.push_back(surface);
    names_.emplace_back(to_lower(surface), *hit);
  }
  return *hit;
}

std::vector<std::size_t> reconcile_entities(
    const std::vector<std::pair<std::string, Embedding>>& surfaces,
    const ReconciliationPolicy& policy, std::vector<ReconciledEntity>* entities) {
  EntityReconciler r(policy);
  std::vector<std::size_t> out;
  out.reserve(surfaces.size());
  for (const auto& [surface, vec] : surfaces) out.push_back(r.reconcile(surface, vec));
  if (entities) *entities = r.entities();
  return out;
}

HeteroGraph index_corpus(const std::vector<CorpusDocument>& docs, const LlmGateway& gateway,
                         EmbedBackend& embed, const IndexingOptions& options,
                         IndexingReport* report) {
  struct Pending {
    std::size_t doc;
    Chunk chunk;
  };
  std::vector<Pending> pending;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (trim(docs[d].text).empty()) continue;
    for (auto& c : chunk(docs[d], options.chunking)) {
      if (!c.text.empty()) pending.push_back({d, std::move(c)});
    }
  }

  std::vector<Extraction> extracted(pending.size());
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(pending.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < pending.size(); ++i) {
      extracted[i] = extract_passage(pending[i].chunk.text, gateway, embed);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < pending.size(); i = next++) {
            extracted[i] = extract_passage(pending[i].chunk.text, gateway, embed);
          }
        } catch (...) {
          errors[w] = std::current_exception();
          next = pending.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  HeteroGraph graph;
  EntityReconciler reconciler(options.reconciliation);
  std::vector<NodeId> entity_nodes;  // reconciler index -> graph id
  std::size_t failed = 0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& p = pending[i];
    const auto& ex = extracted[i];
    const auto passage = graph.add_passage(p.chunk.text, docs[p.doc].doc_id, p.chunk.span);
    if (ex.failed) {
      ++failed;
      continue;
    }
    for (std::size_t k = 0; k < ex.propositions.size(); ++k) {
      std::vector<NodeId> refs;
      for (const auto& surface : ex.propositions[k].entities) {
        const auto s = static_cast<std::size_t>(
            std::find(ex.surfaces.begin(), ex.surfaces.end(), surface) - ex.surfaces.begin());
        const auto before = reconciler.entities().size();
        const auto idx = reconciler.reconcile(surface, ex.surface_vecs[s]);
        if (idx == before) {
          entity_nodes.push_back(graph.add_entity(surface, ex.surface_vecs[s]));
        } else {
          graph.add_alias(entity_nodes[idx], surface);
        }
        refs.push_back(entity_nodes[idx]);
      }
      graph.add_proposition(ex.propositions[k].text, passage, refs, ex.proposition_vecs[k]);
    }
  }
  graph.finalize();
  if (report) *report = {docs.size(), pending.size(), failed};
  spdlog::info("indexed {} documents into {} passages, {} propositions, {} entities ({} failed)",
               docs.size(), graph.passage_count(), graph.proposition_count(), graph.entity_count(),
               failed);
  return graph;
}

GraphCounts graph_stats(const HeteroGraph& graph) { return graph.counts(); }

}  // namespace propgraph
