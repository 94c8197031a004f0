#include "iamod/error.hpp"
#include "iamod/instances.hpp"
#include "iamod/pathalloc.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace iamod;
using iamod::testing::Builder;
using iamod::testing::share;

#define EXPECT_CODE(stmt, expected)                         \
  do {                                                      \
    try {                                                   \
      stmt;                                                 \
      ADD_FAILURE() << "expected " << to_string(expected);  \
    } catch (const Error& e) {                              \
      EXPECT_EQ(e.code(), expected) << e.what();            \
    }                                                       \
  } while (0)

namespace {

Parameters threshold(double t) {
  Parameters p;
  p.fleet_cap = std::numeric_limits<double>::infinity();
  p.time_threshold = t;
  return p;
}

// Walk-only scenario. Node 0 is the origin, node 1 the destination, walk nodes
// follow; `arcs` lists (tail, head, time) over those indices. Switch arcs are
// o->first walk node and last walk node->d with zero time.
struct WalkCase {
  std::shared_ptr<const Scenario> scenario;
  std::size_t arcs = 0;
};

WalkCase walk_case(int walk_nodes, const std::vector<std::tuple<int, int, double>>& arcs, double rate = 1.0,
                   double t_max = 20.0) {
  Builder b;
  const auto o = b.node(Layer::Origin), d = b.node(Layer::Destination);
  std::vector<NodeId> w;
  for (int i = 0; i < walk_nodes; ++i) w.push_back(b.node(Layer::Walk));
  b.sw(o, w.front(), 0);
  for (const auto& [t, h, time] : arcs) b.within(w[static_cast<std::size_t>(t)], w[static_cast<std::size_t>(h)], time, Layer::Walk);
  b.sw(w.back(), d, 0);
  auto sc = iamod::testing::one_region(b.build(), {{DemandId{1}, {}, o, d, rate}}, threshold(t_max));
  return {share(std::move(sc)), arcs.size() + 2};
}

// Arc flows in builder order: the origin switch, the listed arcs, the destination switch.
FlowSolution flows_of(const WalkCase& c, const std::vector<double>& inner, double rate = 1.0) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.arcs), 1);
  f(0, 0) = rate;
  for (std::size_t k = 0; k < inner.size(); ++k) f(static_cast<Eigen::Index>(k + 1), 0) = inner[k];
  f(static_cast<Eigen::Index>(c.arcs - 1), 0) = rate;
  return iamod::testing::with_flows(c.scenario, f);
}

std::vector<std::pair<std::size_t, double>> arc_flows(const SupportSubgraph& s) {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& a : s.arcs) out.emplace_back(a.arc, a.flow);
  return out;
}

// Two stages of two parallel arcs: path times 10 (aa), 17 (ab), 17 (ba), 24 (bb).
WalkCase ladder(double rate = 1.0) {
  return walk_case(3, {{0, 1, 4}, {0, 1, 11}, {1, 2, 6}, {1, 2, 13}}, rate);
}

}  // namespace

TEST(Support, ChainAndThreshold) {
  const auto c = walk_case(2, {{0, 1, 10}});
  const auto s = extract_support(flows_of(c, {1.0}), 0);
  EXPECT_EQ(s.arcs.size(), 3u);
  EXPECT_EQ(s.nodes.size(), 4u);

  const auto tiny = extract_support(flows_of(walk_case(3, {{0, 2, 10}, {0, 1, 1}, {1, 2, 1}}), {1.0, 1e-12, 1e-12}), 0);
  EXPECT_EQ(tiny.arcs.size(), 3u);
}

TEST(Support, DiamondKeepsBothBranches) {
  const auto c = walk_case(4, {{0, 1, 15}, {0, 2, 25}, {1, 3, 0}, {2, 3, 0}});
  const auto s = extract_support(flows_of(c, {0.3, 0.7, 0.3, 0.7}), 0);
  EXPECT_EQ(s.arcs.size(), 6u);
}

TEST(Support, EmptyIsAnError) {
  const auto c = walk_case(2, {{0, 1, 10}});
  const auto zero = iamod::testing::with_flows(c.scenario, Eigen::MatrixXd::Zero(3, 1));
  EXPECT_CODE(extract_support(zero, 0), ErrorCode::EmptySupport);
}

TEST(Support, Normalization) {
  const auto c = walk_case(2, {{0, 1, 10}}, 4.0);
  const auto sol = flows_of(c, {4.0}, 4.0);
  EXPECT_DOUBLE_EQ(extract_support(sol, 0).arcs[1].flow, 1.0);
  EXPECT_DOUBLE_EQ(extract_support(sol, 0, 1e-9, FlowScaling::Absolute).arcs[1].flow, 4.0);
}

TEST(CancelCycles, AcyclicIsUnchanged) {
  const auto s = extract_support(flows_of(ladder(), {0.5, 0.5, 0.5, 0.5}), 0);
  const auto c = cancel_cycles(s);
  EXPECT_EQ(c.cycles, 0u);
  EXPECT_EQ(c.removed_time_mass, 0.0);
  EXPECT_EQ(arc_flows(c.support), arc_flows(s));
}

TEST(CancelCycles, DisjointTwoCycle) {
  // chain 0 -> 1 plus a 2 <-> 3 loop carrying 0.1
  const auto c = walk_case(4, {{0, 1, 5}, {2, 3, 2}, {3, 2, 3}, {1, 3, 5}});
  const auto s = extract_support(flows_of(c, {1.0, 0.1, 0.1, 1.0}), 0);
  const auto out = cancel_cycles(s);
  EXPECT_EQ(out.cycles, 1u);
  EXPECT_NEAR(out.removed_flow, 0.1, 1e-15);
  EXPECT_NEAR(out.removed_time_mass, 0.5, 1e-15);
  ASSERT_EQ(out.support.arcs.size(), 4u);
  for (const auto& a : out.support.arcs) EXPECT_EQ(a.flow, 1.0);
}

TEST(CancelCycles, LoopThroughThePath) {
  // o -> a -> d with 1.0 and a -> b -> a with 0.2
  const auto c = walk_case(3, {{0, 2, 5}, {0, 1, 1}, {1, 0, 1}});
  const auto s = extract_support(flows_of(c, {1.0, 0.2, 0.2}), 0);
  const auto out = cancel_cycles(s);
  EXPECT_EQ(out.cycles, 1u);
  const auto flows = arc_flows(out.support);
  ASSERT_EQ(flows.size(), 3u);
  EXPECT_EQ(flows[0], std::make_pair(std::size_t{0}, 1.0));
  EXPECT_EQ(flows[1], std::make_pair(std::size_t{1}, 1.0));
  EXPECT_EQ(flows[2], std::make_pair(std::size_t{4}, 1.0));
}

TEST(CancelCycles, RandomGraphsBecomeAcyclicWithSameImbalance) {
  std::mt19937_64 rng(17);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uni(2, 7);
    std::vector<std::tuple<int, int, double>> arcs;
    std::vector<double> flow;
    for (int k = uni(1, 14); k > 0; --k) {
      const int t = uni(0, n - 1), h = uni(0, n - 1);
      if (t == h) continue;
      arcs.emplace_back(t, h, uni(0, 9));
      flow.push_back(uni(1, 10) / 10.0);
    }
    if (arcs.empty()) continue;
    const auto c = walk_case(n, arcs);
    const auto s = extract_support(flows_of(c, flow), 0);
    const auto once = cancel_cycles(s);
    EXPECT_NO_THROW(count_paths(once.support, s.origin, s.destination));
    const auto& g = *s.graph;
    std::vector<double> before(g.num_nodes()), after(g.num_nodes());
    for (const auto& a : s.arcs) {
      before[g.tail(a.arc)] += a.flow;
      before[g.head(a.arc)] -= a.flow;
    }
    for (const auto& a : once.support.arcs) {
      after[g.tail(a.arc)] += a.flow;
      after[g.head(a.arc)] -= a.flow;
    }
    for (std::size_t v = 0; v < g.num_nodes(); ++v) EXPECT_NEAR(before[v], after[v], 1e-12);
    const auto twice = cancel_cycles(once.support);
    EXPECT_EQ(twice.cycles, 0u);
    EXPECT_EQ(arc_flows(twice.support), arc_flows(once.support));
  }
}

TEST(Paths, Counts) {
  const auto chain = extract_support(flows_of(walk_case(2, {{0, 1, 10}}), {1.0}), 0);
  EXPECT_EQ(enumerate_paths(chain, 10).count(), 1u);
  const auto diamond = extract_support(
      flows_of(walk_case(4, {{0, 1, 15}, {0, 2, 25}, {1, 3, 0}, {2, 3, 0}}), {0.5, 0.5, 0.5, 0.5}), 0);
  EXPECT_EQ(enumerate_paths(diamond, 10).count(), 2u);

  std::vector<std::tuple<int, int, double>> arcs;
  for (int k = 0; k < 3; ++k) {
    arcs.emplace_back(k, k + 1, 1.0);
    arcs.emplace_back(k, k + 1, 2.0);
  }
  const auto ladder3 = extract_support(flows_of(walk_case(4, arcs), std::vector<double>(6, 0.5)), 0);
  const auto paths = enumerate_paths(ladder3, 100);
  EXPECT_EQ(paths.count(), 8u);
  EXPECT_EQ(count_paths(ladder3, ladder3.origin, ladder3.destination), 8.0);
  EXPECT_TRUE(std::is_sorted(paths.paths.begin(), paths.paths.end()));
  EXPECT_DOUBLE_EQ(paths.times.minCoeff(), 3.0);
  EXPECT_DOUBLE_EQ(paths.times.maxCoeff(), 6.0);
  EXPECT_CODE(enumerate_paths(ladder3, 7), ErrorCode::PathExplosion);
}

TEST(Paths, CyclicSupportRejected) {
  const auto s = extract_support(flows_of(walk_case(3, {{0, 2, 5}, {0, 1, 1}, {1, 0, 1}}), {1.0, 0.2, 0.2}), 0);
  EXPECT_CODE(enumerate_paths(s, 100), ErrorCode::CyclicSupport);
  EXPECT_CODE(count_paths(s, s.origin, s.destination), ErrorCode::CyclicSupport);
}

TEST(Paths, RandomDagsMatchBruteForce) {
  std::mt19937_64 rng(3);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 300; ++trial) {
    const int n = uni(2, 7);
    std::vector<std::tuple<int, int, double>> arcs;
    std::vector<std::pair<int, int>> raw;
    for (int k = uni(1, 12); k > 0; --k) {
      int t = uni(0, n - 1), h = uni(0, n - 1);
      if (t == h) continue;
      if (t > h) std::swap(t, h);
      arcs.emplace_back(t, h, uni(0, 9));
      raw.emplace_back(t, h);
    }
    if (arcs.empty()) continue;
    const auto c = walk_case(n, arcs);
    const auto s = extract_support(flows_of(c, std::vector<double>(arcs.size(), 1.0)), 0);
    // walk node k is graph node k + 2
    const auto from = std::size_t{2}, to = static_cast<std::size_t>(n + 1);
    std::vector<bool> visited(static_cast<std::size_t>(n));
    const long oracle = iamod::testing::brute_path_count(raw, 0, n - 1, visited);
    EXPECT_EQ(count_paths(s, from, to), static_cast<double>(oracle));
    const auto set = enumerate_paths(s, from, to, 100000);
    EXPECT_EQ(static_cast<long>(set.count()), oracle);
    for (std::size_t p = 0; p < set.count(); ++p) {
      double t = 0.0;
      for (const auto a : set.paths[p]) t += c.scenario->graph.arc(a).travel_time;
      EXPECT_EQ(set.times[static_cast<Eigen::Index>(p)], t);
    }
  }
}

TEST(Allocation, SinglePath) {
  const auto c = walk_case(2, {{0, 1, 23}});
  const auto s = extract_support(flows_of(c, {1.0}), 0);
  const auto a = allocate_paths(enumerate_paths(s, 10), s, 20.0);
  ASSERT_EQ(a.fractions.size(), 1);
  EXPECT_NEAR(a.fractions[0], 1.0, 1e-12);
  EXPECT_NEAR(a.objective, 3.0, 1e-12);
}

TEST(Allocation, DiamondIsForced) {
  const auto c = walk_case(4, {{0, 1, 15}, {0, 2, 25}, {1, 3, 0}, {2, 3, 0}});
  const auto s = extract_support(flows_of(c, {0.5, 0.5, 0.5, 0.5}), 0);
  const auto a = allocate_paths(enumerate_paths(s, 10), s, 20.0);
  EXPECT_NEAR(a.fractions[0], 0.5, 1e-12);
  EXPECT_NEAR(a.fractions[1], 0.5, 1e-12);
  EXPECT_NEAR(a.objective, 2.5, 1e-12);
  EXPECT_NEAR(a.excess, 2.5, 1e-12);
  EXPECT_LE(a.residual, 1e-12);
}

TEST(Allocation, LadderMatchesGridScan) {
  // Arc fractions p (fast first stage) and q (fast second stage). Path flows
  // are f_aa = s, f_ab = p - s, f_ba = q - s, f_bb = 1 - p - q + s for s in
  // [max(0, p + q - 1), min(p, q)]; only bb (24 min) exceeds T_max = 20.
  for (const auto& [p, q] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.3, 0.3}, {0.2, 0.6}, {0.9, 0.1}}) {
    const auto c = ladder();
    const auto sol = flows_of(c, {p, 1 - p, q, 1 - q});
    const auto s = extract_support(sol, 0);
    const auto paths = enumerate_paths(s, 10);
    ASSERT_EQ(paths.count(), 4u);
    const auto a = allocate_paths(paths, s, 20.0);
    const double lo = std::max(0.0, p + q - 1), hi = std::min(p, q);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double sv = lo + (hi - lo) * k / 10000.0;
      best = std::min(best, 4.0 * (1 - p - q + sv));
    }
    EXPECT_NEAR(a.objective, best, 1e-6) << p << "," << q;
    EXPECT_LE(a.residual, 1e-9);
    EXPECT_NEAR(a.path_time, a.flow_time, 1e-9);
  }
}

TEST(Allocation, AbsoluteScaling) {
  const auto c = ladder(2.0);
  const auto sol = flows_of(c, {0.6, 1.4, 0.6, 1.4}, 2.0);
  AllocationOptions per_unit, absolute;
  absolute.scaling = FlowScaling::Absolute;
  const auto u = run_algorithm1(sol, 20.0, per_unit);
  const auto a = run_algorithm1(sol, 20.0, absolute);
  ASSERT_EQ(u.per_demand.size(), 1u);
  ASSERT_EQ(a.per_demand.size(), 1u);
  EXPECT_NEAR(u.per_demand[0].fractions.sum(), 1.0, 1e-12);
  EXPECT_NEAR(a.per_demand[0].fractions.sum(), 2.0, 1e-12);
  EXPECT_NEAR(a.total, 2.0 * u.total, 1e-12);
  EXPECT_NEAR(a.per_demand[0].excess, u.per_demand[0].excess, 1e-12);
}

TEST(Algorithm1, PartialFailures) {
  Builder b;
  const auto o = b.node(Layer::Origin), d = b.node(Layer::Destination), w = b.node(Layer::Walk);
  b.sw(o, w, 1);
  b.sw(w, d, 1);
  const auto sc = share(iamod::testing::one_region(b.build(), {{DemandId{1}, {}, o, d, 1.0}, {DemandId{2}, {}, o, d, 1.0}}));
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 2);
  f.col(1).setOnes();
  const auto r = run_algorithm1(iamod::testing::with_flows(sc, f), 20.0);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].demand.value, 1);
  EXPECT_EQ(r.failures[0].code, ErrorCode::EmptySupport);
  ASSERT_EQ(r.per_demand.size(), 1u);
  EXPECT_EQ(r.per_demand[0].demand, 1);
  EXPECT_EQ(r.total, 0.0);
}

TEST(Algorithm1, DiamondGapInstance) {
  const auto sc = share(diamond_gap_scenario());
  for (const auto objective : {Objective::MinTime, Objective::MinUnfairness}) {
    const auto sol = solve(sc, objective);
    EXPECT_NEAR(sol.j_acc, 0.0, 1e-9);
    const auto r = run_algorithm1(sol, sc->params.time_threshold);
    EXPECT_TRUE(r.failures.empty());
    EXPECT_NEAR(path_unfairness_summary(r.per_demand, *sc), 2.5, 1e-9);
  }
}

TEST(Algorithm1, CompetingInstance) {
  const auto sc = share(competing_demand_scenario());
  const auto sol = solve_min_unfairness(sc);
  const auto r = run_algorithm1(sol, sc->params.time_threshold);
  const auto excess = path_excess(r.per_demand, *sc);
  EXPECT_NEAR(excess[0], 0.0, 1e-9);
  EXPECT_NEAR(excess[1], 2.4, 1e-9);
  EXPECT_NEAR(path_unfairness_summary(r.per_demand, *sc), 1.2, 1e-9);
  EXPECT_GE(path_unfairness_summary(r.per_demand, *sc), sol.j_acc - 1e-9);
}

TEST(Algorithm1, ThreadsGiveIdenticalResults) {
  const auto sc = share(demo_scenario());
  const auto sol = solve_min_unfairness(sc);
  AllocationOptions one, four;
  four.threads = 4;
  const auto a = run_algorithm1(sol, sc->params.time_threshold, one);
  const auto b = run_algorithm1(sol, sc->params.time_threshold, four);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(write_allocation_csv(a.per_demand, *sc, "x"), write_allocation_csv(b.per_demand, *sc, "x"));
  EXPECT_EQ(write_paths_csv(a.per_demand, *sc, "x"), write_paths_csv(b.per_demand, *sc, "x"));
}

TEST(Algorithm1, InvariantsOnRandomSolutions) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    iamod::testing::RandomSpec spec;
    spec.finite_cap = trial % 2 == 0;
    const auto sc = share(iamod::testing::random_scenario(rng, spec));
    for (const auto objective : {Objective::MinTime, Objective::MinUnfairness}) {
      FlowSolution sol;
      try {
        sol = solve(sc, objective);
      } catch (const Error&) {
        continue;
      }
      const auto r = run_algorithm1(sol, sc->params.time_threshold);
      EXPECT_TRUE(r.failures.empty());
      double sum = 0.0;
      for (const auto& a : r.per_demand) {
        EXPECT_LE(a.residual, 1e-9);
        EXPECT_NEAR(a.path_time, a.flow_time, 1e-6);
        EXPECT_GE(a.excess, sol.slacks[a.demand] - 1e-9);
        EXPECT_GE(a.fractions.minCoeff(), -1e-12);
        EXPECT_LE(a.fractions.maxCoeff(), 1.0 + 1e-9);
        sum += a.objective;
      }
      EXPECT_NEAR(r.total, sum, 1e-9);
      EXPECT_GE(path_unfairness_summary(r.per_demand, *sc), sol.j_acc - 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(Export, AllocationCsv) {
  const auto sc = share(diamond_gap_scenario());
  const auto r = run_algorithm1(solve_min_time(sc), sc->params.time_threshold);
  const auto csv = write_allocation_csv(r.per_demand, *sc, "abc");
  EXPECT_NE(csv.find("demand_id,path_index,fraction,path_time_min,excess_min"), std::string::npos);
  const auto paths = write_paths_csv(r.per_demand, *sc, "abc");
  EXPECT_NE(paths.find("demand_id,node_sequence"), std::string::npos);
}
