#include "iamod/instances.hpp"

#include "text_io.hpp"

#include <fmt/format.h>

#include <set>

namespace iamod {

namespace {

class GraphBuilder {
 public:
  NodeId node(Layer layer, std::string label = {}) {
    const NodeId id{static_cast<std::int64_t>(nodes_.size())};
    nodes_.push_back({id, layer, std::move(label)});
    return id;
  }

  void arc(NodeId tail, NodeId head, double minutes, ArcKind kind) {
    arcs_.push_back({ArcId{static_cast<std::int64_t>(arcs_.size())}, tail, head, minutes, kind});
  }

  void link(NodeId a, NodeId b, double minutes, Layer layer) {
    arc(a, b, minutes, ArcKind::within(layer));
    arc(b, a, minutes, ArcKind::within(layer));
  }

  void switch_arc(NodeId tail, NodeId head, double minutes) { arc(tail, head, minutes, ArcKind::mode_switch()); }

  IntermodalGraph build() { return build_graph(std::move(nodes_), std::move(arcs_)); }

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
};

std::vector<RegionPopulation> regions(std::initializer_list<std::pair<int, double>> list) {
  std::vector<RegionPopulation> out;
  for (const auto& [id, n] : list) out.push_back({RegionId{id}, n});
  return out;
}

}  // namespace

Scenario demo_scenario() {
  constexpr int kSide = 4;
  constexpr double kWalk = 6.0, kBike = 3.0, kCar = 2.0, kTransit = 2.5;

  GraphBuilder b;
  struct Zone {
    std::optional<NodeId> o, d;
    NodeId w, c;
    std::optional<NodeId> bike, stop;
  };
  // Zones that originate or receive trips; the others are pass-through.
  const std::set<std::pair<int, int>> terminals{{0, 0}, {3, 3}, {0, 3}, {3, 0}, {2, 0},
                                                {2, 3}, {3, 1}, {1, 1}, {2, 2}};
  std::vector<Zone> zones;
  for (int r = 0; r < kSide; ++r)
    for (int c = 0; c < kSide; ++c) {
      const auto label = fmt::format("Z{}{}", r, c);
      Zone z{std::nullopt, std::nullopt, b.node(Layer::Walk, label), b.node(Layer::Car, label), std::nullopt,
             std::nullopt};
      if (terminals.contains({r, c})) {
        z.o = b.node(Layer::Origin, label);
        z.d = b.node(Layer::Destination, label);
      }
      if (r < 2 && c < 2) z.bike = b.node(Layer::Bike, label);
      if (r == 1 || c == 2) z.stop = b.node(Layer::PublicTransit, label);
      zones.push_back(z);
    }
  auto at = [&](int r, int c) -> Zone& { return zones[static_cast<std::size_t>(r * kSide + c)]; };

  for (int r = 0; r < kSide; ++r)
    for (int c = 0; c < kSide; ++c) {
      auto& z = at(r, c);
      if (z.o) {
        b.switch_arc(*z.o, z.w, 0.5);
        b.switch_arc(z.w, *z.d, 0.5);
        b.switch_arc(*z.o, z.c, 3.0);  // pickup wait
        b.switch_arc(z.c, *z.d, 0.5);
      }
      if (z.bike) {
        if (z.o) {
          b.switch_arc(*z.o, *z.bike, 1.0);
          b.switch_arc(*z.bike, *z.d, 1.0);
        }
        b.switch_arc(*z.bike, z.w, 0.5);
      }
      if (z.stop) {
        b.switch_arc(z.w, *z.stop, 3.0);  // headway wait
        b.switch_arc(*z.stop, z.w, 0.5);
      }
      for (const auto& [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
        if (r + dr >= kSide || c + dc >= kSide) continue;
        auto& n = at(r + dr, c + dc);
        b.link(z.w, n.w, kWalk, Layer::Walk);
        b.link(z.c, n.c, kCar, Layer::Car);
        if (z.bike && n.bike) b.link(*z.bike, *n.bike, kBike, Layer::Bike);
        // Two transit lines: along row 1 and along column 2.
        if (z.stop && n.stop && ((dr == 0 && r == 1) || (dc == 0 && c == 2)))
          b.link(*z.stop, *n.stop, kTransit, Layer::PublicTransit);
      }
    }

  auto region_of = [](int r, int c) { return 1 + (r >= 2 ? 2 : 0) + (c >= 2 ? 1 : 0); };
  std::vector<Demand> demands;
  auto pair = [&](int r0, int c0, int r1, int c1, double rate) {
    for (const auto& [fr, fc, tr, tc] : {std::array{r0, c0, r1, c1}, std::array{r1, c1, r0, c0}}) {
      const DemandId id{static_cast<std::int64_t>(demands.size() + 1)};
      demands.push_back({id, RegionId{region_of(fr, fc)}, *at(fr, fc).o, *at(tr, tc).d, rate});
    }
  };
  pair(0, 0, 3, 3, 2.0);  // long, transit 26.5 min
  pair(0, 3, 3, 0, 1.0);  // long, transit 30 min
  pair(2, 0, 2, 3, 4.0);  // three blocks, walk 19 min
  pair(3, 1, 1, 1, 5.0);  // two blocks, walk 13 min
  pair(0, 0, 1, 1, 3.0);  // bike cluster
  pair(2, 2, 2, 3, 6.0);  // one block

  Parameters params;
  params.fleet_cap = 60.0;
  params.time_threshold = 20.0;
  return make_scenario(b.build(), std::move(demands), regions({{1, 1200}, {2, 900}, {3, 1500}, {4, 800}}), params);
}

Scenario competing_demand_scenario() {
  GraphBuilder b;
  std::vector<Demand> demands;
  // walk time, car time on the forward car arc, car time on the return arc
  const std::array<std::array<double, 3>, 2> legs{{{16.0, 2.0, 18.0}, {24.0, 14.0, 6.0}}};
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const auto label = fmt::format("{}", static_cast<char>('A' + k));
    const auto o = b.node(Layer::Origin, label), d = b.node(Layer::Destination, label);
    const auto w1 = b.node(Layer::Walk, label), w2 = b.node(Layer::Walk, label);
    const auto c1 = b.node(Layer::Car, label), c2 = b.node(Layer::Car, label);
    b.switch_arc(o, w1, 1.0);
    b.arc(w1, w2, legs[k][0], ArcKind::within(Layer::Walk));
    b.switch_arc(w2, d, 1.0);
    b.switch_arc(o, c1, 1.0);
    b.arc(c1, c2, legs[k][1], ArcKind::within(Layer::Car));
    b.arc(c2, c1, legs[k][2], ArcKind::within(Layer::Car));
    b.switch_arc(c2, d, 1.0);
    const auto id = static_cast<std::int64_t>(k + 1);
    demands.push_back({DemandId{id}, RegionId{id}, o, d, 1.0});
  }
  Parameters params;
  params.fleet_cap = 20.0;
  return make_scenario(b.build(), std::move(demands), regions({{1, 500}, {2, 500}}), params);
}

Scenario diamond_gap_scenario() {
  GraphBuilder b;
  const auto o = b.node(Layer::Origin, "o"), d = b.node(Layer::Destination, "d");
  const auto c1 = b.node(Layer::Car), c2 = b.node(Layer::Car);
  const auto w1 = b.node(Layer::Walk), w2 = b.node(Layer::Walk);
  b.switch_arc(o, c1, 3.0);
  b.arc(c1, c2, 11.0, ArcKind::within(Layer::Car));
  b.switch_arc(c2, d, 1.0);
  b.arc(c2, c1, 11.0, ArcKind::within(Layer::Car));
  b.switch_arc(o, w1, 1.0);
  b.arc(w1, w2, 23.0, ArcKind::within(Layer::Walk));
  b.switch_arc(w2, d, 1.0);
  Parameters params;
  params.fleet_cap = 11.0;
  return make_scenario(b.build(), {{DemandId{1}, RegionId{1}, o, d, 1.0}}, regions({{1, 100}}), params);
}

Scenario scaled(const Scenario& scenario, double factor) {
  auto demands = scenario.demands;
  for (auto& d : demands) d.rate *= factor;
  std::vector<RegionPopulation> pops;
  for (const auto& r : scenario.regions) pops.push_back({r.id, r.population});
  auto params = scenario.params;
  params.fleet_cap *= factor;
  return make_scenario(scenario.graph, std::move(demands), std::move(pops), params);
}

void write_scenario_files(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_file((dir / "network.json").string(), write_network_json(scenario.graph));
  detail::write_file((dir / "demands.csv").string(), write_demands_csv(scenario));
  detail::write_file((dir / "params.txt").string(), write_params(scenario));
}

}  // namespace iamod
