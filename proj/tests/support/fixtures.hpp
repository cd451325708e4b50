#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "propgraph/encoding.hpp"
#include "propgraph/graph.hpp"
#include "propgraph/indexing.hpp"
#include "propgraph/llm.hpp"
#include "propgraph/local_mode.hpp"
#include "propgraph/traversal.hpp"

namespace fixtures {

std::filesystem::path fixture_path(const std::string& relative);
std::string read_file(const std::filesystem::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "propgraph");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

propgraph::Embedding random_unit(std::mt19937_64& rng, std::size_t dim);

struct RandomGraphShape {
  std::size_t min_props = 2;
  std::size_t max_props = 50;
  std::size_t max_entities_per_prop = 3;
  std::size_t dimension = 16;
};

/// Random finalized graph: propositions spread over passages, each mentioning
/// up to max_entities_per_prop random entities, random unit embeddings.
propgraph::HeteroGraph random_graph(std::mt19937_64& rng, const RandomGraphShape& shape = {});

/// Graph, mocks and index bundled for end-to-end tests. Not movable: the index
/// and context point into the bundle.
struct MockStack {
  propgraph::MockChatBackend chat;
  propgraph::MockEmbedBackend embed;
  propgraph::LlmGateway gateway{chat};
  propgraph::HeteroGraph graph;
  std::unique_ptr<propgraph::GraphIndex> index;

  MockStack() = default;
  MockStack(const MockStack&) = delete;
  MockStack& operator=(const MockStack&) = delete;

  /// Indexes `docs` with the heuristic mock, then installs `rules` for querying.
  void build(const std::vector<propgraph::CorpusDocument>& docs,
             std::vector<propgraph::MockRule> rules = {});
  propgraph::QueryContext ctx();
  /// Index of the proposition whose text equals `text`; throws when absent.
  std::uint32_t proposition(const std::string& text) const;
};

std::unique_ptr<MockStack> two_hop_stack();

inline constexpr const char* kTwoHopQuestion = "Where was the founder of Aldmoor Press born?";
inline constexpr const char* kHopOne = "Aldmoor Press was founded by Edith Calloway in 1898.";
inline constexpr const char* kHopTwo = "Edith Calloway grew up and was born in Belgravia.";

/// Forty single-fact passages about one region, ten per theme.
std::vector<propgraph::CorpusDocument> facet_corpus();
inline constexpr const char* kFacetQuestion = "What drives the economy of Norland?";
/// Decompose rule answering kFacetQuestion with four theme sub-questions.
propgraph::MockRule facet_decompose_rule();

}  // namespace fixtures
