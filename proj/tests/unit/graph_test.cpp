#include <gtest/gtest.h>

#include <random>

#include "propgraph/error.hpp"
#include "propgraph/graph.hpp"
#include "support/fixtures.hpp"

using namespace propgraph;

namespace {

Embedding unit(std::size_t dim, std::size_t hot) {
  Embedding v(dim, 0.0f);
  v[hot] = 1.0f;
  return v;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvariantViolation;
}

}  // namespace

TEST(Graph, PassagesAreDenselyNumbered) {
  HeteroGraph g;
  EXPECT_EQ(g.add_passage("Sun is a star.", "doc0", {0, 14}), NodeId::passage(0));
  EXPECT_EQ(g.add_passage("Moon is not.", "doc0", {15, 27}), NodeId::passage(1));
  EXPECT_EQ(code_of([&] { g.add_passage("", "doc0", {0, 0}); }), ErrorCode::EmptyText);
}

TEST(Graph, PropositionDegreeCountsPassageAndEntities) {
  HeteroGraph g;
  const auto p = g.add_passage("text", "d", {0, 4});
  const auto a = g.add_entity("A", unit(4, 0));
  const auto b = g.add_entity("B", unit(4, 1));
  const std::vector<NodeId> two{a, b};
  const std::vector<NodeId> dup{a, a};
  const auto x = g.add_proposition("x", p, two, unit(4, 2));
  const auto y = g.add_proposition("y", p, {}, unit(4, 3));
  const auto z = g.add_proposition("z", p, dup, unit(4, 3));
  g.finalize();
  EXPECT_EQ(g.degree(x), 3u);
  EXPECT_EQ(g.degree(y), 1u);
  EXPECT_EQ(g.degree(z), 2u);
  EXPECT_EQ(g.edge_count(), 6u);
}

TEST(Graph, NeighborsAreSortedAndSymmetric) {
  HeteroGraph g;
  const auto p = g.add_passage("text", "d", {0, 4});
  g.add_entity("A", unit(4, 0));
  const auto b = g.add_entity("B", unit(4, 1));
  const std::vector<NodeId> ents{b};
  const auto x = g.add_proposition("x", p, ents, unit(4, 2));
  g.add_proposition("w", p, ents, unit(4, 2));
  g.add_proposition("v", p, {}, unit(4, 2));
  g.finalize();
  // A was an orphan and is dropped; B is renumbered to 0
  ASSERT_EQ(g.entity_count(), 1u);
  EXPECT_EQ(g.entity(0).canonical_name, "B");
  EXPECT_EQ(g.neighbors(x), (std::vector<NodeId>{NodeId::passage(0), NodeId::entity(0)}));
  const auto psg = g.neighbors(p);
  EXPECT_EQ(psg.size(), 3u);
  const auto props = g.passage_propositions(0);
  EXPECT_EQ(std::vector<std::uint32_t>(props.begin(), props.end()), (std::vector<std::uint32_t>{0, 1, 2}));
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const auto u = g.node_at(f);
    EXPECT_EQ(g.flat_index(u), f);
    for (const auto v : g.neighbors(u)) {
      const auto back = g.neighbors(v);
      EXPECT_NE(std::find(back.begin(), back.end(), u), back.end());
    }
  }
}

TEST(Graph, RejectsBadInput) {
  HeteroGraph g;
  const auto p = g.add_passage("text", "d", {0, 4});
  EXPECT_EQ(code_of([&] { g.add_proposition("", p, {}, unit(4, 0)); }), ErrorCode::EmptyText);
  EXPECT_EQ(code_of([&] { g.add_proposition("x", NodeId::passage(9), {}, unit(4, 0)); }),
            ErrorCode::UnknownNode);
  const std::vector<NodeId> ghost{NodeId::entity(3)};
  EXPECT_EQ(code_of([&] { g.add_proposition("x", p, ghost, unit(4, 0)); }), ErrorCode::UnknownNode);
  const Embedding not_unit{2.0f, 0.0f, 0.0f, 0.0f};
  EXPECT_EQ(code_of([&] { g.add_proposition("x", p, {}, not_unit); }), ErrorCode::NotNormalized);
  g.add_proposition("x", p, {}, unit(4, 0));
  EXPECT_EQ(code_of([&] { g.add_proposition("y", p, {}, unit(3, 0)); }), ErrorCode::DimensionMismatch);
  g.finalize();
  EXPECT_EQ(code_of([&] { g.add_passage("more", "d", {0, 4}); }), ErrorCode::InvalidArgument);
}

TEST(Graph, AliasesAreDeduplicated) {
  HeteroGraph g;
  const auto p = g.add_passage("text", "d", {0, 4});
  const auto e = g.add_entity("New York City", unit(4, 0));
  g.add_alias(e, "NYC");
  g.add_alias(e, "NYC");
  const std::vector<NodeId> ents{e};
  g.add_proposition("x", p, ents, unit(4, 1));
  g.finalize();
  EXPECT_EQ(g.entity(0).aliases, (std::vector<std::string>{"New York City", "NYC"}));
}

TEST(Graph, NodeIdText) {
  EXPECT_EQ(to_string(NodeId::proposition(12)), "prop:12");
  EXPECT_EQ(parse_node_id("ent:0"), NodeId::entity(0));
  EXPECT_EQ(parse_node_id("psg:3"), NodeId::passage(3));
  EXPECT_THROW(parse_node_id("node:1"), Error);
  EXPECT_THROW(parse_node_id("prop:x"), Error);
}

TEST(Graph, RandomGraphsSatisfyInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = fixtures::random_graph(rng);
    EXPECT_NO_THROW(g.validate());
    std::size_t passage_edges = 0;
    for (const auto& [a, b] : g.edges()) {
      EXPECT_EQ(a.kind, NodeKind::Proposition);
      EXPECT_NE(b.kind, NodeKind::Proposition);
      passage_edges += b.kind == NodeKind::Passage ? 1 : 0;
    }
    EXPECT_EQ(passage_edges, g.proposition_count());
    for (std::uint32_t e = 0; e < g.entity_count(); ++e) EXPECT_FALSE(g.entity_propositions(e).empty());
    const auto counts = g.counts();
    EXPECT_EQ(counts.edges, g.edges().size());
  }
}
