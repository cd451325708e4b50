#include "support/fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace fixtures {

using namespace propgraph;

std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(PROPGRAPH_FIXTURE_DIR) / relative;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = gauss(rng);
  return normalized(std::span<const double>(v));
}

HeteroGraph random_graph(std::mt19937_64& rng, const RandomGraphShape& shape) {
  std::uniform_int_distribution<std::size_t> n_props(shape.min_props, shape.max_props);
  const std::size_t np = n_props(rng);
  const std::size_t n_passages = std::uniform_int_distribution<std::size_t>(1, np / 2 + 1)(rng);
  const std::size_t n_entities = std::uniform_int_distribution<std::size_t>(1, np)(rng);

  HeteroGraph g;
  std::vector<NodeId> passages;
  for (std::size_t i = 0; i < n_passages; ++i) {
    passages.push_back(g.add_passage("passage " + std::to_string(i), "doc", {0, 0}));
  }
  std::vector<NodeId> entities;
  for (std::size_t i = 0; i < n_entities; ++i) {
    entities.push_back(g.add_entity("Entity" + std::to_string(i), random_unit(rng, shape.dimension)));
  }
  std::uniform_int_distribution<std::size_t> pick_passage(0, n_passages - 1);
  std::uniform_int_distribution<std::size_t> pick_entity(0, n_entities - 1);
  std::uniform_int_distribution<std::size_t> n_mentions(0, shape.max_entities_per_prop);
  for (std::size_t i = 0; i < np; ++i) {
    std::vector<NodeId> mentions;
    const auto k = n_mentions(rng);
    for (std::size_t t = 0; t < k; ++t) mentions.push_back(entities[pick_entity(rng)]);
    g.add_proposition("proposition " + std::to_string(i), passages[pick_passage(rng)], mentions,
                      random_unit(rng, shape.dimension));
  }
  g.finalize();
  return g;
}

void MockStack::build(const std::vector<CorpusDocument>& docs, std::vector<MockRule> rules) {
  graph = index_corpus(docs, gateway, embed);
  for (auto& r : rules) chat.add_rule(std::move(r));
  index = std::make_unique<GraphIndex>(graph);
}

QueryContext MockStack::ctx() {
  return QueryContext{*index, gateway, embed};
}

std::uint32_t MockStack::proposition(const std::string& text) const {
  for (const auto& p : graph.propositions()) {
    if (p.text == text) return p.id.index;
  }
  throw std::runtime_error("no proposition '" + text + "'");
}

std::unique_ptr<MockStack> two_hop_stack() {
  auto stack = std::make_unique<MockStack>();
  stack->build(load_corpus(fixture_path("two_hop/corpus")),
               MockChatBackend::parse_rules(read_file(fixture_path("two_hop/rules.json"))));
  return stack;
}

std::vector<CorpusDocument> facet_corpus() {
  const char* themes[] = {"fishing", "timber", "tourism", "shipping"};
  const char* towns[] = {"Arvik", "Belund", "Corsa", "Dunmere", "Eskholm",
                         "Farrow", "Galte", "Hollin", "Istra",  "Jarnvik"};
  std::vector<CorpusDocument> docs;
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t i = 0; i < 10; ++i) {
      const auto workers = 100 * (t + 1) + 7 * i;
      std::string text = std::string("The ") + themes[t] + " trade of Norland employs " +
                         std::to_string(workers) + " people in " + towns[i] + ".";
      char id[32];
      std::snprintf(id, sizeof id, "facet_%zu_%02zu", t, i);
      docs.push_back({id, std::move(text)});
    }
  }
  return docs;
}

MockRule facet_decompose_rule() {
  MockRule r;
  r.template_id = TemplateId::Decompose;
  r.matchers.push_back({"question", SlotMatcher::Kind::Contains, "Norland"});
  r.completion =
      "1. How does fishing support Norland?\n"
      "2. How does timber support Norland?\n"
      "3. How does tourism support Norland?\n"
      "4. How does shipping support Norland?";
  return r;
}

}  // namespace fixtures
