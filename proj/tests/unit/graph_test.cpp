#include "agentgraph/errors.hpp"
#include "agentgraph/graph/graph_spec.hpp"

#include <gtest/gtest.h>

using namespace agentgraph;

namespace {

std::vector<NodeType> four_node_types() {
  return {NodeType::SlotIndependent, NodeType::SlotDependent, NodeType::SlotDependent, NodeType::SlotDependent};
}

}  // namespace

TEST(BuildGraph, IsolatedGraphHasNoEdges) {
  const auto g = build_graph(2, GraphStructure::FU);
  EXPECT_EQ(g.node_count(), 3);
  EXPECT_TRUE((g.adjacency().array() == 0).all());
}

TEST(BuildGraph, MasterNodeConnectsOnlyThroughNodeZero) {
  const auto g = build_graph(2, GraphStructure::MN);
  Adjacency expected = Adjacency::Zero(3, 3);
  expected(0, 1) = expected(0, 2) = static_cast<std::uint8_t>(EdgeType::I_to_S);
  expected(1, 0) = expected(2, 0) = static_cast<std::uint8_t>(EdgeType::S_to_I);
  EXPECT_EQ(g.adjacency(), expected);
}

TEST(BuildGraph, FullyConnectedHasEveryOrderedPair) {
  const auto g = build_graph(3, GraphStructure::FC);
  EXPECT_EQ(g.edge_count(), 12);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(g.adjacency()(i, j) != 0, i != j);
}

TEST(BuildGraph, RejectsZeroSlots) {
  EXPECT_THROW(build_graph(0, GraphStructure::FC), ConfigurationError);
}

TEST(BuildGraph, EdgeCodesMatchNodeTypes) {
  const auto g = build_graph(2, GraphStructure::FC);
  EXPECT_EQ(g.adjacency()(1, 2), 1);  // S->S
  EXPECT_EQ(g.adjacency()(1, 0), 2);  // S->I
  EXPECT_EQ(g.adjacency()(0, 1), 3);  // I->S
}

// Property over n = 1..12 and all structures.
TEST(BuildGraph, StructuralInvariantsHoldForAllSizes) {
  for (int n = 1; n <= 12; ++n) {
    for (auto s : {GraphStructure::FC, GraphStructure::MN, GraphStructure::FU}) {
      const auto g = build_graph(n, s);
      ASSERT_EQ(g.node_count(), n + 1);
      EXPECT_EQ(g.node_type(0), NodeType::SlotIndependent);
      for (int i = 0; i <= n; ++i) {
        EXPECT_EQ(g.adjacency()(i, i), 0);
        for (int j = 0; j <= n; ++j) {
          const auto z = g.adjacency()(i, j);
          if (z != 0) { EXPECT_EQ(z, static_cast<std::uint8_t>(edge_type_between(g.node_type(i), g.node_type(j)))); }
          const bool ij = z != 0, ji = g.adjacency()(j, i) != 0;
          if (s == GraphStructure::FC) { EXPECT_EQ(ij, ji); }
          if (s == GraphStructure::MN) { EXPECT_EQ(ij, i != j && (i == 0 || j == 0)); }
          if (s == GraphStructure::FU) { EXPECT_FALSE(ij); }
        }
      }
    }
  }
}

TEST(Neighbors, SparseGraphIncomingEdges) {
  const GraphSpec g(four_node_types(), {{0, 2}, {0, 3}, {1, 2}, {1, 0}, {2, 3}, {3, 2}, {3, 0}});
  EXPECT_EQ(g.edge_count(), 7);
  const std::vector<Neighbor> expected{{1, EdgeType::S_to_I}, {3, EdgeType::S_to_I}};
  EXPECT_EQ(neighbors_in(g, 0), expected);
  const std::vector<Neighbor> into2{{0, EdgeType::I_to_S}, {1, EdgeType::S_to_S}, {3, EdgeType::S_to_S}};
  EXPECT_EQ(neighbors_in(g, 2), into2);
}

TEST(Neighbors, IsolatedAndMasterNode) {
  const auto fu = build_graph(4, GraphStructure::FU);
  for (int j = 0; j <= 4; ++j) EXPECT_TRUE(neighbors_in(fu, j).empty());
  const auto mn = build_graph(4, GraphStructure::MN);
  for (int j = 1; j <= 4; ++j) EXPECT_EQ(neighbors_in(mn, j), (std::vector<Neighbor>{{0, EdgeType::I_to_S}}));
}

TEST(Neighbors, OutOfRangeIndexIsUsageError) {
  const auto g = build_graph(2, GraphStructure::FC);
  EXPECT_THROW(neighbors_in(g, 3), UsageError);
  EXPECT_THROW(neighbors_in(g, -1), UsageError);
}

TEST(GraphSpecTest, RejectsSelfLoopsAndInvalidTypes) {
  EXPECT_THROW(GraphSpec(four_node_types(), {{1, 1}}), ConfigurationError);
  EXPECT_THROW(GraphSpec({NodeType::SlotDependent, NodeType::SlotIndependent}, {}), ConfigurationError);
  EXPECT_THROW(GraphSpec({NodeType::SlotIndependent, NodeType::SlotIndependent}, {}), ConfigurationError);
  EXPECT_THROW(edge_type_between(NodeType::SlotIndependent, NodeType::SlotIndependent), ConfigurationError);
}
