#include "iamod/error.hpp"
#include "iamod/network.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace iamod;
using iamod::testing::Builder;

#define EXPECT_CODE(stmt, expected)                         \
  do {                                                      \
    try {                                                   \
      stmt;                                                 \
      ADD_FAILURE() << "expected " << to_string(expected);  \
    } catch (const Error& e) {                              \
      EXPECT_EQ(e.code(), expected) << e.what();            \
    }                                                       \
  } while (0)

TEST(Network, MinimalGraph) {
  Builder b;
  const auto o = b.node(Layer::Origin);
  const auto d = b.node(Layer::Destination);
  const auto g = b.build();
  EXPECT_EQ(g.num_nodes(), 2u);
  EXPECT_EQ(g.num_arcs(), 0u);
  EXPECT_TRUE(g.out_arcs(*g.node_index(o)).empty());
  EXPECT_TRUE(g.in_arcs(*g.node_index(d)).empty());
}

TEST(Network, OriginToTransitIsIllegal) {
  Builder b;
  const auto o = b.node(Layer::Origin);
  const auto p = b.node(Layer::PublicTransit);
  b.sw(o, p, 1.0);
  EXPECT_CODE(b.build(), ErrorCode::IllegalModeSwitch);
}

TEST(Network, WalkTransitWalkChain) {
  Builder b;
  const auto o = b.node(Layer::Origin);
  const auto w1 = b.node(Layer::Walk);
  const auto w2 = b.node(Layer::Walk);
  b.node(Layer::Bike);
  b.node(Layer::Car);
  const auto p = b.node(Layer::PublicTransit);
  const auto d = b.node(Layer::Destination);
  b.sw(o, w1, 1);
  b.sw(w1, p, 2);
  b.sw(p, w2, 3);
  b.sw(w2, d, 4);
  const auto g = b.build();
  EXPECT_EQ(g.num_nodes(), 7u);
  EXPECT_EQ(g.switch_arcs().size(), 4u);
}

TEST(Network, SwitchPairTable) {
  EXPECT_TRUE(validate_switch_pair(Layer::Origin, Layer::Car));
  EXPECT_FALSE(validate_switch_pair(Layer::Destination, Layer::Origin));
  EXPECT_FALSE(validate_switch_pair(Layer::Walk, Layer::Bike));
  EXPECT_TRUE(validate_switch_pair(Layer::Bike, Layer::Walk));
  int permitted = 0;
  for (const auto t : kAllLayers)
    for (const auto h : kAllLayers) permitted += validate_switch_pair(t, h) ? 1 : 0;
  EXPECT_EQ(permitted, 9);
  static_assert(validate_switch_pair(Layer::Car, Layer::Destination));
}

TEST(Network, EveryForbiddenSwitchIsRejected) {
  int rejected = 0;
  for (const auto t : kAllLayers)
    for (const auto h : kAllLayers) {
      if (validate_switch_pair(t, h)) continue;
      Builder b;
      const auto a = b.node(t);
      const auto c = b.node(h);
      b.sw(a, c, 1.0);
      EXPECT_CODE(b.build(), ErrorCode::IllegalModeSwitch);
      ++rejected;
    }
  EXPECT_EQ(rejected, 27);
}

TEST(Network, PermittedSwitchesBuild) {
  for (const auto t : kAllLayers)
    for (const auto h : kAllLayers) {
      if (!validate_switch_pair(t, h)) continue;
      Builder b;
      b.sw(b.node(t), b.node(h), 0.5);
      EXPECT_NO_THROW(b.build());
    }
}

TEST(Network, BuildErrors) {
  {
    Builder b;
    const auto w = b.node(Layer::Walk);
    std::vector<Node> nodes = b.nodes();
    nodes.push_back({w, Layer::Car, {}});
    EXPECT_CODE(build_graph(nodes, {}), ErrorCode::DuplicateNodeId);
  }
  {
    Builder b;
    const auto w1 = b.node(Layer::Walk), w2 = b.node(Layer::Walk);
    b.within(w1, w2, 1, Layer::Walk);
    std::vector<Arc> arcs = b.arcs();
    arcs.push_back(arcs.front());
    EXPECT_CODE(build_graph(b.nodes(), arcs), ErrorCode::DuplicateArcId);
  }
  {
    Builder b;
    const auto w1 = b.node(Layer::Walk);
    b.within(w1, NodeId{42}, 1, Layer::Walk);
    EXPECT_CODE(b.build(), ErrorCode::DanglingArcEndpoint);
  }
  {
    Builder b;
    const auto w1 = b.node(Layer::Walk), w2 = b.node(Layer::Walk);
    b.within(w1, w2, -1, Layer::Walk);
    EXPECT_CODE(b.build(), ErrorCode::NegativeTravelTime);
  }
  {
    Builder b;
    const auto w1 = b.node(Layer::Walk);
    b.within(w1, w1, 1, Layer::Walk);
    EXPECT_CODE(b.build(), ErrorCode::SelfLoop);
  }
  {
    Builder b;
    const auto o1 = b.node(Layer::Origin), o2 = b.node(Layer::Origin);
    b.within(o1, o2, 1, Layer::Origin);
    EXPECT_CODE(b.build(), ErrorCode::InternalArcInTerminalLayer);
  }
  {
    Builder b;
    const auto w = b.node(Layer::Walk), c = b.node(Layer::Car);
    b.within(w, c, 1, Layer::Walk);
    EXPECT_CODE(b.build(), ErrorCode::ArcLayerMismatch);
  }
}

TEST(Network, ParallelArcsAllowed) {
  Builder b;
  const auto c1 = b.node(Layer::Car), c2 = b.node(Layer::Car);
  b.within(c1, c2, 1, Layer::Car);
  b.within(c1, c2, 2, Layer::Car);
  const auto g = b.build();
  EXPECT_EQ(g.out_arcs(*g.node_index(c1)).size(), 2u);
}

TEST(Network, ArcsOfLayer) {
  Builder b;
  const auto c1 = b.node(Layer::Car), c2 = b.node(Layer::Car), c3 = b.node(Layer::Car);
  const auto w1 = b.node(Layer::Walk), w2 = b.node(Layer::Walk);
  b.within(c2, c3, 1, Layer::Car);
  b.within(w1, w2, 1, Layer::Walk);
  b.within(c1, c2, 1, Layer::Car);
  b.within(w2, w1, 1, Layer::Walk);
  b.within(c3, c1, 1, Layer::Car);
  const auto g = b.build();
  const auto cars = arcs_of_layer(g, Layer::Car);
  ASSERT_EQ(cars.size(), 3u);
  EXPECT_TRUE(std::is_sorted(cars.begin(), cars.end(), [](const Arc& a, const Arc& c) { return a.id < c.id; }));
  EXPECT_TRUE(arcs_of_layer(g, Layer::Origin).empty());
  EXPECT_TRUE(switch_arcs(g).empty());
}

TEST(Network, AdjacencyAndPartitionOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sc = iamod::testing::random_scenario(rng);
    const auto& g = sc.graph;
    std::size_t total = switch_arcs(g).size();
    for (const auto l : kAllLayers) total += arcs_of_layer(g, l).size();
    EXPECT_EQ(total, g.num_arcs());
    std::vector<int> seen_out(g.num_arcs()), seen_in(g.num_arcs());
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      for (const auto a : g.out_arcs(v)) {
        EXPECT_EQ(g.tail(a), v);
        ++seen_out[a];
      }
      for (const auto a : g.in_arcs(v)) {
        EXPECT_EQ(g.head(a), v);
        ++seen_in[a];
      }
    }
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
      EXPECT_EQ(seen_out[a], 1);
      EXPECT_EQ(seen_in[a], 1);
    }
  }
}

TEST(Network, JsonRoundTripIsByteIdentical) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sc = iamod::testing::random_scenario(rng);
    const auto text = write_network_json(sc.graph);
    const auto again = write_network_json(read_network_json(text));
    EXPECT_EQ(text, again);
  }
}

TEST(Network, JsonRejectsUnknownKind) {
  const std::string text = R"({"nodes":[{"id":0,"layer":"walk"},{"id":1,"layer":"walk"}],
    "arcs":[{"id":0,"tail":0,"head":1,"travel_time_min":1,"kind":"hovercraft"}]})";
  EXPECT_CODE(read_network_json(text), ErrorCode::ParseError);
}

TEST(Network, JsonKeepsLabels) {
  Builder b;
  std::vector<Node> nodes{{NodeId{5}, Layer::Origin, "5611"}, {NodeId{9}, Layer::Destination, ""}};
  const auto g = read_network_json(write_network_json(build_graph(nodes, {})));
  EXPECT_EQ(g.node(*g.node_index(NodeId{5})).label, "5611");
}
