#pragma once

// Test-only helpers: a small graph builder, a random scenario generator and
// independent oracles (Dijkstra, vertex enumeration, brute-force path counts).

#include "iamod/planner.hpp"
#include "iamod/scenario.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace iamod::testing {

class Builder {
 public:
  NodeId node(Layer layer) {
    const NodeId id{static_cast<std::int64_t>(nodes_.size())};
    nodes_.push_back({id, layer, {}});
    return id;
  }
  ArcId arc(NodeId tail, NodeId head, double t, ArcKind kind) {
    const ArcId id{static_cast<std::int64_t>(arcs_.size())};
    arcs_.push_back({id, tail, head, t, kind});
    return id;
  }
  ArcId within(NodeId tail, NodeId head, double t, Layer layer) { return arc(tail, head, t, ArcKind::within(layer)); }
  ArcId sw(NodeId tail, NodeId head, double t) { return arc(tail, head, t, ArcKind::mode_switch()); }

  IntermodalGraph build() const { return build_graph(nodes_, arcs_); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
};

inline std::shared_ptr<const Scenario> share(Scenario s) { return std::make_shared<const Scenario>(std::move(s)); }

/// Single-region scenario with the given demands.
inline Scenario one_region(IntermodalGraph g, std::vector<Demand> demands, Parameters p = {}) {
  for (auto& d : demands) d.region = RegionId{1};
  return make_scenario(std::move(g), std::move(demands), {{RegionId{1}, 100.0}}, p);
}

/// FlowSolution carrying `flows` (arcs x demands) with analytic slacks.
inline FlowSolution with_flows(std::shared_ptr<const Scenario> sc, const Eigen::MatrixXd& flows) {
  const auto layout = VariableLayout::for_scenario(*sc, false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.width());
  for (Eigen::Index m = 0; m < flows.cols(); ++m)
    for (Eigen::Index a = 0; a < flows.rows(); ++a) x[layout.flow(m, a)] = flows(a, m);
  return solution_from_columns(std::move(sc), Objective::MinTime, x);
}

// ---------------------------------------------------------------------------
// Random scenarios

struct RandomSpec {
  int max_nodes = 30;
  int max_arcs = 80;
  int max_demands = 5;
  bool finite_cap = false;
};

/// Random intermodal scenario with integer travel times. The walk and car
/// layers are strongly connected rings, so every demand is routable and any
/// car trip can be rebalanced.
inline Scenario random_scenario(std::mt19937_64& rng, const RandomSpec& spec = {}) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  while (true) {
    Builder b;
    const int n_dem = uni(1, spec.max_demands);
    const int n_walk = uni(3, 6), n_car = uni(2, 5), n_pt = uni(0, 3), n_bike = uni(0, 3);
    if (n_walk + n_car + n_pt + n_bike + 2 * n_dem > spec.max_nodes) continue;
    std::vector<NodeId> walk, car, pt, bike;
    for (int i = 0; i < n_walk; ++i) walk.push_back(b.node(Layer::Walk));
    for (int i = 0; i < n_car; ++i) car.push_back(b.node(Layer::Car));
    for (int i = 0; i < n_pt; ++i) pt.push_back(b.node(Layer::PublicTransit));
    for (int i = 0; i < n_bike; ++i) bike.push_back(b.node(Layer::Bike));
    auto pick = [&](const std::vector<NodeId>& v) { return v[static_cast<std::size_t>(uni(0, static_cast<int>(v.size()) - 1))]; };
    auto ring = [&](const std::vector<NodeId>& v, Layer layer, int lo, int hi, bool both) {
      if (v.size() < 2) return;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& next = v[(i + 1) % v.size()];
        b.within(v[i], next, uni(lo, hi), layer);
        if (both && v.size() > 2) b.within(next, v[i], uni(lo, hi), layer);
      }
    };
    ring(walk, Layer::Walk, 3, 10, true);
    ring(car, Layer::Car, 1, 4, uni(0, 1) == 1);
    ring(pt, Layer::PublicTransit, 2, 5, false);
    ring(bike, Layer::Bike, 2, 5, false);
    for (int k = uni(0, 3); k > 0; --k) {
      const auto a = pick(walk), c = pick(walk);
      if (a != c) b.within(a, c, uni(3, 12), Layer::Walk);
    }
    for (const auto& p : pt) {
      b.sw(pick(walk), p, uni(1, 3));
      b.sw(p, pick(walk), uni(0, 1));
    }
    for (const auto& bk : bike) b.sw(bk, pick(walk), uni(0, 1));

    std::vector<Demand> demands;
    for (int m = 0; m < n_dem; ++m) {
      const auto o = b.node(Layer::Origin), d = b.node(Layer::Destination);
      b.sw(o, pick(walk), uni(0, 2));
      b.sw(pick(walk), d, uni(0, 2));
      if (uni(0, 3) > 0) {
        b.sw(o, pick(car), uni(1, 3));
        b.sw(pick(car), d, uni(0, 1));
      }
      if (!bike.empty() && uni(0, 1) == 1) {
        b.sw(o, pick(bike), 1);
        b.sw(pick(bike), d, 1);
      }
      demands.push_back({DemandId{m + 1}, RegionId{uni(1, 3)}, o, d, static_cast<double>(uni(1, 8)) / 2.0});
    }
    if (static_cast<int>(b.arcs().size()) > spec.max_arcs) continue;
    Parameters p;
    p.fleet_cap = spec.finite_cap ? static_cast<double>(uni(0, 40)) : std::numeric_limits<double>::infinity();
    p.time_threshold = uni(8, 25);
    std::vector<RegionPopulation> regions{{RegionId{1}, static_cast<double>(uni(0, 500))},
                                          {RegionId{2}, static_cast<double>(uni(1, 500))},
                                          {RegionId{3}, static_cast<double>(uni(1, 500))}};
    return make_scenario(b.build(), std::move(demands), std::move(regions), p);
  }
}

// ---------------------------------------------------------------------------
// Oracles

/// Shortest o-d travel time by Dijkstra over the raw arc list.
inline double dijkstra(const IntermodalGraph& g, std::size_t origin, std::size_t destination) {
  std::vector<double> dist(g.num_nodes(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[origin] = 0.0;
  queue.push({0.0, origin});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
      if (g.tail(a) != v) continue;
      const double nd = d + g.arc(a).travel_time;
      if (nd < dist[g.head(a)]) {
        dist[g.head(a)] = nd;
        queue.push({nd, g.head(a)});
      }
    }
  }
  return dist[destination];
}

/// min c'x s.t. A_eq x = b_eq, A_le x <= b_le, lower <= x <= upper.
struct DenseLp {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_le;
  Eigen::VectorXd b_le;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  explicit DenseLp(Eigen::Index n)
      : a_eq(0, n), b_eq(0), a_le(0, n), b_le(0), c(Eigen::VectorXd::Zero(n)),
        lower(Eigen::VectorXd::Zero(n)),
        upper(Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity())) {}

  void add_eq(const Eigen::RowVectorXd& row, double rhs) {
    a_eq.conservativeResize(a_eq.rows() + 1, Eigen::NoChange);
    a_eq.row(a_eq.rows() - 1) = row;
    b_eq.conservativeResize(b_eq.size() + 1);
    b_eq[b_eq.size() - 1] = rhs;
  }
  void add_le(const Eigen::RowVectorXd& row, double rhs) {
    a_le.conservativeResize(a_le.rows() + 1, Eigen::NoChange);
    a_le.row(a_le.rows() - 1) = row;
    b_le.conservativeResize(b_le.size() + 1);
    b_le[b_le.size() - 1] = rhs;
  }
};

/// Minimum over all basic feasible solutions, found by trying every set of
/// active inequalities. Assumes the optimum is attained at a vertex.
inline std::optional<double> vertex_enumeration(const DenseLp& lp, double tol = 1e-7) {
  const Eigen::Index n = lp.c.size();
  // All inequalities as G x <= h, bounds included.
  std::vector<Eigen::RowVectorXd> g_rows;
  std::vector<double> h;
  for (Eigen::Index i = 0; i < lp.a_le.rows(); ++i) {
    g_rows.push_back(lp.a_le.row(i));
    h.push_back(lp.b_le[i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = -1.0;
    g_rows.push_back(e);
    h.push_back(-lp.lower[j]);
    if (std::isfinite(lp.upper[j])) {
      e[j] = 1.0;
      g_rows.push_back(e);
      h.push_back(lp.upper[j]);
    }
  }
  Eigen::Index rank_eq = 0;
  if (lp.a_eq.rows() > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lp.a_eq);
    lu.setThreshold(1e-10);
    rank_eq = lu.rank();
  }
  const auto k = static_cast<std::size_t>(n - rank_eq);
  const std::size_t total = g_rows.size();
  if (k > total) return std::nullopt;

  std::optional<double> best;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    const Eigen::Index rows = lp.a_eq.rows() + static_cast<Eigen::Index>(k);
    Eigen::MatrixXd m(rows, n);
    Eigen::VectorXd rhs(rows);
    m.topRows(lp.a_eq.rows()) = lp.a_eq;
    rhs.head(lp.a_eq.rows()) = lp.b_eq;
    for (std::size_t i = 0; i < k; ++i) {
      m.row(lp.a_eq.rows() + static_cast<Eigen::Index>(i)) = g_rows[pick[i]];
      rhs[lp.a_eq.rows() + static_cast<Eigen::Index>(i)] = h[pick[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-10);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(rhs);
      bool ok = (m * x - rhs).cwiseAbs().maxCoeff() <= tol;
      for (std::size_t i = 0; ok && i < total; ++i) ok = g_rows[i].dot(x) <= h[i] + tol;
      if (ok) {
        const double v = lp.c.dot(x);
        if (!best || v < *best) best = v;
      }
    }
    // next combination
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == total - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// Number of simple o-d paths by exhaustive recursion over raw arcs.
inline long brute_path_count(const std::vector<std::pair<int, int>>& arcs, int from, int to,
                             std::vector<bool>& visited) {
  if (from == to) return 1;
  visited[static_cast<std::size_t>(from)] = true;
  long n = 0;
  for (const auto& [t, h] : arcs)
    if (t == from && !visited[static_cast<std::size_t>(h)]) n += brute_path_count(arcs, h, to, visited);
  visited[static_cast<std::size_t>(from)] = false;
  return n;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("iamod_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace iamod::testing
