#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "propgraph/error.hpp"
#include "propgraph/suggest.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace propgraph;

namespace {

constexpr std::size_t kDim = 8;

Embedding basis(std::size_t hot) {
  Embedding v(kDim, 0.0f);
  v[hot] = 1.0f;
  return v;
}

Embedding mix(std::size_t a, double wa, std::size_t b, double wb) {
  std::vector<double> v(kDim, 0.0);
  v[a] += wa;
  v[b] += wb;
  return normalized(std::span<const double>(v));
}

struct PropSpec {
  std::vector<std::string> entities;
  Embedding embedding;
};

/// One passage per proposition.
HeteroGraph build(const std::vector<PropSpec>& props) {
  HeteroGraph g;
  std::map<std::string, NodeId> ents;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto psg = g.add_passage("passage " + std::to_string(i), "d", {0, 1});
    std::vector<NodeId> refs;
    for (const auto& n : props[i].entities) {
      auto it = ents.find(n);
      if (it == ents.end()) it = ents.emplace(n, g.add_entity(n, basis(ents.size() % kDim))).first;
      refs.push_back(it->second);
    }
    g.add_proposition("p" + std::to_string(i), psg, refs, props[i].embedding);
  }
  g.finalize();
  return g;
}

/// Dense end-to-end ranking on the whole graph: probabilities per proposition.
std::vector<double> dense_local_scores(const HeteroGraph& g, EmbeddingView q,
                                       const std::vector<std::uint32_t>& seeds, const WalkParams& p) {
  const auto ts = oracle::structural(g);
  std::vector<double> c;
  for (std::uint32_t i = 0; i < g.proposition_count(); ++i) c.push_back(cosine(q, g.proposition_embedding(i)));
  const auto tn = oracle::semantic(ts, c, p.tau, p.theta);
  return oracle::ppr(oracle::blend(ts, tn.matrix, p.lambda), seeds, p.damping);
}

void expect_ranking_matches(const PropositionIds& got, const std::vector<double>& pi,
                            const std::vector<std::uint32_t>& seeds, std::size_t k) {
  std::vector<std::uint32_t> want;
  for (std::uint32_t i = 0; i < pi.size(); ++i) {
    if (pi[i] > 0.0 && std::find(seeds.begin(), seeds.end(), i) == seeds.end()) want.push_back(i);
  }
  std::stable_sort(want.begin(), want.end(), [&](auto a, auto b) { return pi[a] > pi[b]; });
  if (want.size() > k) want.resize(k);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(pi[got[i]], pi[want[i]], 1e-7) << i;
}

}  // namespace

TEST(Pool, InsertionOrderAndProvenance) {
  PropositionPool a;
  EXPECT_TRUE(a.insert(5, {Round::Seed, 0, 1}));
  EXPECT_FALSE(a.insert(5, {Round::Walk, 2, 0}));
  a.insert(2, {Round::Walk, 1, 0});
  EXPECT_EQ(a.ids(), (PropositionIds{5, 2}));
  EXPECT_EQ(a.provenance(5), (Provenance{Round::Seed, 0, 1}));
  PropositionPool b;
  b.insert(2, {Round::Walk, 3, 0});
  b.insert(7, {Round::Walk, 3, 0});
  EXPECT_EQ(a.merge(b), 1u);
  EXPECT_EQ(a.ids(), (PropositionIds{5, 2, 7}));
  EXPECT_EQ(a.provenance(2).iteration, 1u);
}

TEST(Naive, PlantedQueryComesFirst) {
  std::mt19937_64 rng(2);
  auto g = fixtures::random_graph(rng, {.min_props = 30, .max_props = 30, .dimension = 16});
  const auto q = g.proposition_embedding(17);
  SuggestConfig cfg;
  cfg.k = 1;
  EXPECT_EQ(suggest_naive(q, g, cfg), PropositionIds{17});
}

TEST(Naive, EqualsTopKOracleAndIgnoresEdges) {
  std::mt19937_64 rng(3);
  const auto g = fixtures::random_graph(rng, {.min_props = 30, .max_props = 30, .dimension = 16});
  const auto q = fixtures::random_unit(rng, 16);
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::uint32_t i = 0; i < 30; ++i) all.emplace_back(-cosine(q, g.proposition_embedding(i)), i);
  std::sort(all.begin(), all.end());
  PropositionIds want;
  for (std::size_t i = 0; i < 20; ++i) want.push_back(all[i].second);
  const auto got = suggest_naive(q, g, {});
  EXPECT_EQ(got, want);

  // same embeddings, no shared entities
  HeteroGraph flat;
  const auto psg = flat.add_passage("p", "d", {0, 1});
  for (std::uint32_t i = 0; i < 30; ++i) flat.add_proposition("x", psg, {}, g.proposition_embedding(i));
  flat.finalize();
  EXPECT_EQ(suggest_naive(q, flat, {}), got);
}

TEST(Local, NothingReachableGivesEmpty) {
  const auto g = build({{{}, basis(0)}, {{}, basis(1)}});
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0};
  EXPECT_TRUE(suggest_local(basis(0), index, seeds, {}).empty());
}

TEST(Local, LambdaOneIsQueryIndependent) {
  std::mt19937_64 rng(4);
  const auto g = fixtures::random_graph(rng, {.min_props = 40, .max_props = 40});
  const GraphIndex index(g);
  SuggestConfig cfg;
  cfg.walk.lambda = 1.0;
  const std::vector<std::uint32_t> seeds{0, 3};
  const auto ref = suggest_local(fixtures::random_unit(rng, 16), index, seeds, cfg);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(suggest_local(fixtures::random_unit(rng, 16), index, seeds, cfg), ref);
}

TEST(Local, TwoChainsFollowTheQuery) {
  // seed in the middle, chain A (embeddings near e0) and chain B (near e1)
  std::vector<PropSpec> props{{{"A1", "B1"}, mix(0, 1, 1, 1)}};
  for (int i = 1; i <= 3; ++i) {
    props.push_back({{"A" + std::to_string(i), "A" + std::to_string(i + 1)}, mix(0, 1, 2 + i, 0.3)});
    props.push_back({{"B" + std::to_string(i), "B" + std::to_string(i + 1)}, mix(1, 1, 2 + i, 0.3)});
  }
  const auto g = build(props);
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0};
  SuggestConfig cfg;
  cfg.k = 6;
  const auto q = basis(0);
  const auto got = suggest_local(q, index, seeds, cfg);
  ASSERT_EQ(got.size(), 6u);
  // chain A sits at odd ids; each A node outranks the B node at the same depth
  const auto pos = [&](std::uint32_t id) { return std::find(got.begin(), got.end(), id) - got.begin(); };
  EXPECT_EQ(got.front(), 1u);
  for (std::uint32_t depth = 1; depth <= 3; ++depth) EXPECT_LT(pos(2 * depth - 1), pos(2 * depth));
  expect_ranking_matches(got, dense_local_scores(g, q, seeds, cfg.walk), seeds, cfg.k);
}

TEST(Local, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fixtures::random_graph(rng, {.min_props = 10, .max_props = 30});
    const GraphIndex index(g);
    const auto q = fixtures::random_unit(rng, 16);
    const std::vector<std::uint32_t> seeds{0, 1};
    SuggestConfig cfg;
    cfg.k = 8;
    cfg.walk.theta = 0.0;
    const auto got = suggest_local(q, index, seeds, cfg);
    expect_ranking_matches(got, dense_local_scores(g, q, seeds, cfg.walk), seeds, cfg.k);
  }
}

TEST(Local, ExclusionsAreNeverReturned) {
  std::mt19937_64 rng(6);
  const auto g = fixtures::random_graph(rng, {.min_props = 30, .max_props = 30});
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0};
  const auto q = fixtures::random_unit(rng, 16);
  const auto all = suggest_local(q, index, seeds, {});
  ASSERT_GE(all.size(), 3u);
  const ExclusionSet ex{all[0], all[2]};
  const auto rest = suggest_local(q, index, seeds, {}, ex);
  for (const auto id : rest) EXPECT_FALSE(ex.contains(id));
  EXPECT_EQ(rest.front(), all[1]);
}

TEST(Global, SingletonPartitionEqualsLocal) {
  std::mt19937_64 rng(7);
  const auto g = fixtures::random_graph(rng, {.min_props = 30, .max_props = 30});
  const GraphIndex index(g);
  const auto q = fixtures::random_unit(rng, 16);
  const std::vector<std::uint32_t> seeds{4};
  const auto local = suggest_local(q, index, seeds, {});
  const auto global = suggest_global({{4, q}}, index, {});
  EXPECT_EQ(global.ids, local);
  EXPECT_TRUE(std::all_of(global.best_walker.begin(), global.best_walker.end(), [](auto w) { return w == 0; }));
}

TEST(Global, SymmetricWalkersTieByIndex) {
  // p1 - X - p0 - Y - p2 and p3 - Z - p4 - W - p5 mirrored: walkers on p0 and p4
  const auto e = basis(0);
  const auto g = build({{{"X", "Y"}, e}, {{"X"}, e}, {{"Y"}, e}, {{"Z"}, e}, {{"Z", "W"}, e}, {{"W"}, e}});
  const GraphIndex index(g);
  const auto s = suggest_global({{0, e}, {4, e}}, index, {});
  ASSERT_EQ(s.ids.size(), 4u);
  EXPECT_EQ(s.ids, (PropositionIds{1, 2, 3, 5}));
  EXPECT_EQ(s.best_walker, (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(Global, FallbackRowsGiveStructuralBlend) {
  std::mt19937_64 rng(8);
  const auto g = fixtures::random_graph(rng, {.min_props = 20, .max_props = 20});
  const GraphIndex index(g);
  SuggestConfig high;
  high.walk.theta = 1.0;  // nothing passes: every T_n row falls back to T_s
  SuggestConfig structural;
  structural.walk.lambda = 1.0;
  const auto q = fixtures::random_unit(rng, 16);
  const std::vector<Walker> walkers{{0, q}, {1, q}};
  EXPECT_EQ(suggest_global(walkers, index, high).ids, suggest_global(walkers, index, structural).ids);
}

TEST(Select, MapsVerdictToIds) {
  HeteroGraph g;
  const auto psg = g.add_passage("p", "d", {0, 1});
  g.add_proposition("Paris is in France.", psg, {}, basis(0));
  g.add_proposition("Cats are mammals.", psg, {}, basis(1));
  g.add_proposition("Paris has museums.", psg, {}, basis(2));
  g.finalize();
  MockChatBackend chat;
  const LlmGateway gw(chat);
  const auto s = select("Where is Paris?", {2, 1, 0}, g, gw);
  EXPECT_EQ(s.kept, (PropositionIds{2, 0}));
  EXPECT_EQ(s.pruned, PropositionIds{1});
  EXPECT_TRUE(select("Where is Paris?", {}, g, gw).kept.empty());
  EXPECT_EQ(chat.calls(), 1u);
}

TEST(Select, TwoHopDistractorIsPruned) {
  auto stack = fixtures::two_hop_stack();
  const auto hop1 = stack->proposition(fixtures::kHopOne);
  const auto distractor = stack->proposition("Leeds is a city in Yorkshire.");
  const auto s = select(fixtures::kTwoHopQuestion, {hop1, distractor}, stack->graph, stack->gateway);
  EXPECT_EQ(s.kept, PropositionIds{hop1});
  EXPECT_EQ(s.pruned, PropositionIds{distractor});
}
