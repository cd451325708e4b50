#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "propgraph/error.hpp"
#include "propgraph/traversal.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace propgraph;

namespace {

Embedding basis(std::size_t dim, std::size_t hot) {
  Embedding v(dim, 0.0f);
  v[hot] = 1.0f;
  return v;
}

/// props[i] = entity names of proposition i; passage_of[i] = its passage.
HeteroGraph build(const std::vector<std::vector<std::string>>& props,
                  const std::vector<std::size_t>& passage_of) {
  HeteroGraph g;
  const auto n_passages = *std::max_element(passage_of.begin(), passage_of.end()) + 1;
  for (std::size_t i = 0; i < n_passages; ++i) g.add_passage("passage " + std::to_string(i), "d", {0, 1});
  std::map<std::string, NodeId> ents;
  for (const auto& names : props) {
    for (const auto& n : names) {
      if (!ents.contains(n)) ents.emplace(n, g.add_entity(n, basis(8, ents.size() % 8)));
    }
  }
  for (std::size_t i = 0; i < props.size(); ++i) {
    std::vector<NodeId> refs;
    for (const auto& n : props[i]) refs.push_back(ents.at(n));
    g.add_proposition("p" + std::to_string(i), NodeId::passage(static_cast<std::uint32_t>(passage_of[i])),
                      refs, basis(8, i % 8));
  }
  g.finalize();
  return g;
}

void expect_matches(const TransitionMatrix& m, const oracle::Dense& d, double tol) {
  ASSERT_EQ(m.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) EXPECT_NEAR(m.at(i, j), d[i][j], tol) << i << "," << j;
}

TransitionMatrix from_dense(const oracle::Dense& d) {
  std::vector<TransitionMatrix::Row> rows(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      if (d[i][j] != 0.0) rows[i].emplace_back(static_cast<std::uint32_t>(j), d[i][j]);
  return TransitionMatrix::from_rows(rows);
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

TEST(Structural, TwoPropositionsSharingAnEntity) {
  const auto g = build({{"E"}, {"E"}}, {0, 1});
  const auto ts = build_structural_transition(g);
  expect_matches(ts, {{0, 1}, {1, 0}}, 1e-15);
}

TEST(Structural, SinglePropositionIsDangling) {
  const auto g = build({{"E"}}, {0});
  const auto ts = build_structural_transition(g);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_TRUE(ts.is_dangling(0));
  EXPECT_EQ(ts.at(0, 0), 0.0);
}

TEST(Structural, CliqueOfFourIsUniform) {
  const auto g = build({{"E"}, {"E"}, {"E"}, {"E"}}, {0, 1, 2, 3});
  const auto ts = build_structural_transition(g);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(ts.at(i, j), i == j ? 0.0 : 1.0 / 3.0, 1e-15);
  expect_matches(ts, oracle::structural(g), 1e-15);
}

TEST(Structural, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = fixtures::random_graph(rng);
    expect_matches(build_structural_transition(g), oracle::structural(g), 1e-12);
  }
}

TEST(Structural, SubgraphRestrictsHubs) {
  // p0 - E - p1, p1 - F - p2; dropping F isolates p2 from p1
  const auto g = build({{"E"}, {"E", "F"}, {"F"}}, {0, 1, 2});
  std::vector<NodeId> nodes;
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const auto n = g.node_at(f);
    if (!(n.kind == NodeKind::Entity && g.entity(n.index).canonical_name == "F")) nodes.push_back(n);
  }
  const auto ts = build_structural_transition(g, Subgraph(nodes));
  EXPECT_DOUBLE_EQ(ts.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(ts.at(1, 0), 1.0);
  EXPECT_TRUE(ts.is_dangling(2));
}

TEST(Semantic, ThresholdKillsLowSimilarity) {
  const auto ts = from_dense({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}});
  const std::vector<double> c{0.5, 0.3, 0.9};
  WalkParams p;
  const auto tn = build_semantic_transition(ts, c, p);
  EXPECT_DOUBLE_EQ(tn.at(2, 0), 1.0);
  EXPECT_EQ(tn.at(2, 1), 0.0);
}

TEST(Semantic, EqualSimilaritiesGiveUniformRows) {
  const auto ts = from_dense({{0, 0.2, 0.8}, {0.5, 0, 0.5}, {0.9, 0.1, 0}});
  const std::vector<double> c{0.7, 0.7, 0.7};
  const auto tn = build_semantic_transition(ts, c, WalkParams{});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(tn.at(i, j), i == j ? 0.0 : 0.5, 1e-15);
}

TEST(Semantic, FallbackCopiesStructuralRow) {
  const auto ts = from_dense({{0, 0.25, 0.75}, {1, 0, 0}, {0.5, 0.5, 0}});
  const std::vector<double> c{0.1, 0.2, 0.3};
  std::vector<bool> fallback;
  const auto tn = build_semantic_transition(ts, c, WalkParams{}, &fallback);
  EXPECT_EQ(fallback, (std::vector<bool>{true, true, true}));
  EXPECT_EQ(tn, ts);
}

TEST(Semantic, MatchesDenseOracleOnFiveNodes) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> sim(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Dense d = oracle::zeros(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (i != j && u(rng) < 0.6) d[i][j] = u(rng);
    oracle::zero_diagonal_and_renormalize(d);
    std::vector<double> c(5);
    for (auto& x : c) x = sim(rng);
    const auto ts = from_dense(d);
    std::vector<bool> fallback;
    const auto tn = build_semantic_transition(ts, c, WalkParams{}, &fallback);
    const auto want = oracle::semantic(ts.dense(), c, 0.1, 0.4);
    expect_matches(tn, want.matrix, 1e-12);
    EXPECT_EQ(fallback, want.fallback);
  }
}

TEST(Blend, ExtremesAndIdempotence) {
  const auto a = from_dense({{0, 1}, {1, 0}});
  const auto b = from_dense({{0, 1}, {1, 0}});
  EXPECT_EQ(blend(a, b, 0.5), a);
  const auto ts = from_dense({{0, 0.5, 0.5}, {1, 0, 0}, {0.5, 0.5, 0}});
  const auto tn = from_dense({{0, 1, 0}, {1, 0, 0}, {0, 1, 0}});
  EXPECT_EQ(blend(ts, tn, 1.0), ts);
  EXPECT_EQ(blend(ts, tn, 0.0), tn);
  EXPECT_THROW(blend(ts, tn, 1.5), Error);
}

TEST(Ppr, SingleNode) {
  const TransitionMatrix m(1);
  const std::vector<std::uint32_t> seeds{0};
  const auto pi = ppr(m, seeds, WalkParams{});
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_NEAR(pi[0], 1.0, 1e-12);
}

TEST(Ppr, TwoNodeClosedForm) {
  const auto m = from_dense({{0, 1}, {1, 0}});
  const std::vector<std::uint32_t> seeds{0};
  WalkParams p;
  p.ppr_epsilon = 1e-12;
  p.ppr_max_iters = 1000;
  const auto pi = ppr(m, seeds, p);
  // pi0 = (1 - d) + d pi1, pi1 = d pi0
  const double d = p.damping;
  EXPECT_NEAR(pi[0], 1.0 / (1.0 + d), 1e-9);
  EXPECT_NEAR(pi[1], d / (1.0 + d), 1e-9);
  const auto dense = oracle::ppr(m.dense(), {0}, d, 1e-12);
  EXPECT_NEAR(dense[0], 1.0 / (1.0 + d), 1e-9);
}

TEST(Ppr, MatchesDenseOracleOnEightNodes) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  oracle::Dense d = oracle::zeros(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      if (i != j && u(rng) < 0.5) d[i][j] = u(rng);
  oracle::zero_diagonal_and_renormalize(d);
  const auto m = from_dense(d);
  const std::vector<std::uint32_t> seeds{1, 4};
  const auto pi = ppr(m, seeds, WalkParams{});
  EXPECT_LT(l1(pi, oracle::ppr(m.dense(), seeds, 0.85)), 1e-6);
}

TEST(Ppr, DistributionAndPermutationInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial;
    oracle::Dense d = oracle::zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && u(rng) < 0.3) d[i][j] = u(rng);
    oracle::zero_diagonal_and_renormalize(d);
    const std::vector<std::uint32_t> seeds{0, static_cast<std::uint32_t>(n - 1), 0};
    const WalkParams p;
    const auto pi = ppr(from_dense(d), seeds, p);
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-8);
    for (double x : pi) EXPECT_GE(x, 0.0);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Dense pd = oracle::zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pd[perm[i]][perm[j]] = d[i][j];
    const std::vector<std::uint32_t> pseeds{static_cast<std::uint32_t>(perm[0]),
                                            static_cast<std::uint32_t>(perm[n - 1])};
    const auto ppi = ppr(from_dense(pd), pseeds, p);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(pi[i] - ppi[perm[i]]);
    EXPECT_LE(diff, 2 * p.ppr_epsilon);
  }
}

TEST(Ppr, RejectsBadSeeds) {
  const auto m = from_dense({{0, 1}, {1, 0}});
  EXPECT_THROW(ppr(m, std::vector<std::uint32_t>{}, WalkParams{}), Error);
  EXPECT_THROW(ppr(m, std::vector<std::uint32_t>{2}, WalkParams{}), Error);
}

TEST(WalkParams, Validation) {
  WalkParams p;
  EXPECT_NO_THROW(p.validate());
  p.damping = 1.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.tau = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.lambda = -0.1;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Extract, LargeTargetGivesReachableGraph) {
  const auto g = build({{"E"}, {"E", "F"}, {"F"}, {"G"}}, {0, 0, 1, 0});
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0};
  const auto sub = extract_subgraph(index, seeds, 1000, WalkParams{});
  EXPECT_EQ(sub.size(), g.node_count());
}

TEST(Extract, MinimalClosure) {
  const auto g = build({{"E"}, {"E"}, {"E"}}, {0, 1, 2});
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0, 1};
  const auto sub = extract_subgraph(index, seeds, 4, WalkParams{});
  EXPECT_EQ(sub.nodes(), (std::vector<NodeId>{NodeId::passage(0), NodeId::passage(1),
                                               NodeId::proposition(0), NodeId::proposition(1)}));
}

TEST(Extract, ChainsOutrankDistantClique) {
  // seed p0 with two chains of 4 propositions; a 4-entity clique sits three bridge hops past chain A
  std::vector<std::vector<std::string>> props{{"A1", "B1"}};
  for (int i = 1; i <= 4; ++i) {
    props.push_back({"A" + std::to_string(i), "A" + std::to_string(i + 1)});
    props.push_back({"B" + std::to_string(i), "B" + std::to_string(i + 1)});
  }
  props.push_back({"A5", "X1"});
  props.push_back({"X1", "X2"});
  props.push_back({"X2", "K1"});
  const std::size_t first_clique = props.size();
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) props.push_back({"K" + std::to_string(a), "K" + std::to_string(b)});
  std::vector<std::size_t> passage(props.size());
  std::iota(passage.begin(), passage.end(), 0);
  const auto g = build(props, passage);
  const GraphIndex index(g);
  const std::vector<std::uint32_t> seeds{0};
  // seed, its passage, 8 chain propositions with their passages and 10 chain entities
  const auto sub = extract_subgraph(index, seeds, 28, WalkParams{});
  for (std::uint32_t p = 1; p <= 8; ++p) EXPECT_TRUE(sub.contains(NodeId::proposition(p))) << p;
  for (auto p = static_cast<std::uint32_t>(first_clique); p < g.proposition_count(); ++p) {
    EXPECT_FALSE(sub.contains(NodeId::proposition(p))) << p;
  }
}

TEST(Extract, MatchesDenseRwrOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fixtures::random_graph(rng, {.min_props = 5, .max_props = 20});
    const GraphIndex index(g);
    const std::vector<std::uint32_t> seeds{0};
    const std::size_t target = 4 + trial % 10;
    const auto sub = extract_subgraph(index, seeds, target, WalkParams{});

    const std::size_t n = g.node_count();
    oracle::Dense walk = oracle::zeros(n, n);
    for (std::size_t f = 0; f < n; ++f) {
      const auto nb = g.neighbors(g.node_at(f));
      for (const auto v : nb) walk[f][g.flat_index(v)] = 1.0 / static_cast<double>(nb.size());
    }
    const auto pi = oracle::ppr(walk, {static_cast<std::uint32_t>(g.flat_index(NodeId::proposition(0)))}, 0.85);
    std::vector<std::size_t> order;
    for (std::size_t f = 0; f < n; ++f)
      if (pi[f] > 0.0) order.push_back(f);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pi[a] / static_cast<double>(g.degree(g.node_at(a))) >
             pi[b] / static_cast<double>(g.degree(g.node_at(b)));
    });
    std::set<NodeId> want{NodeId::proposition(0), g.proposition(0).passage};
    for (const auto f : order) {
      if (want.size() >= target) break;
      const auto id = g.node_at(f);
      if (want.contains(id)) continue;
      if (id.kind == NodeKind::Proposition) {
        const auto psg = g.proposition(id.index).passage;
        if (want.size() + (want.contains(psg) ? 1 : 2) > target) continue;
        want.insert(psg);
      }
      want.insert(id);
    }
    // near-ties in pi / degree may order differently; compare the admitted mass instead
    double got_mass = 0.0;
    double want_mass = 0.0;
    for (const auto& id : sub.nodes()) got_mass += pi[g.flat_index(id)];
    for (const auto& id : want) want_mass += pi[g.flat_index(id)];
    EXPECT_EQ(sub.size(), want.size());
    EXPECT_NEAR(got_mass, want_mass, 1e-6);
  }
}
