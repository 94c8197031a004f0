#include "iamod/pathalloc.hpp"

#include "iamod/error.hpp"
#include "iamod/simplex.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <thread>

namespace iamod {

namespace {

// Out-arcs of each support node, as positions into support.arcs.
std::map<std::size_t, std::vector<std::size_t>> support_adjacency(const SupportSubgraph& s) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < s.arcs.size(); ++k) out[s.graph->tail(s.arcs[k].arc)].push_back(k);
  return out;
}

std::vector<std::size_t> incident_nodes(const IntermodalGraph& g, const std::vector<SupportArc>& arcs) {
  std::vector<std::size_t> nodes;
  for (const auto& sa : arcs) {
    nodes.push_back(g.tail(sa.arc));
    nodes.push_back(g.head(sa.arc));
  }
  std::ranges::sort(nodes);
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// First directed cycle found by DFS from the lowest node, as support arc
// positions; empty if acyclic.
std::vector<std::size_t> find_cycle(const SupportSubgraph& s) {
  const auto adj = support_adjacency(s);
  enum class Color { White, Gray, Black };
  std::map<std::size_t, Color> color;
  for (const auto v : s.nodes) color[v] = Color::White;

  struct Frame {
    std::size_t node;
    std::size_t next = 0;
    std::size_t via = 0;  // support arc used to enter this node
  };
  for (const auto root : s.nodes) {
    if (color[root] != Color::White) continue;
    std::vector<Frame> stack{{root, 0, 0}};
    color[root] = Color::Gray;
    while (!stack.empty()) {
      auto& top = stack.back();
      const auto it = adj.find(top.node);
      if (it == adj.end() || top.next >= it->second.size()) {
        color[top.node] = Color::Black;
        stack.pop_back();
        continue;
      }
      const std::size_t k = it->second[top.next++];
      const std::size_t head = s.graph->head(s.arcs[k].arc);
      if (color[head] == Color::Gray) {
        std::vector<std::size_t> cycle{k};
        for (auto f = stack.rbegin(); f != stack.rend() && f->node != head; ++f) cycle.push_back(f->via);
        std::ranges::reverse(cycle);
        return cycle;
      }
      if (color[head] == Color::White) {
        color[head] = Color::Gray;
        stack.push_back({head, 0, k});
      }
    }
  }
  return {};
}

// Nodes in topological order; throws CyclicSupport otherwise.
std::vector<std::size_t> topological_order(const SupportSubgraph& s) {
  std::map<std::size_t, std::size_t> indegree;
  for (const auto v : s.nodes) indegree[v] = 0;
  for (const auto& sa : s.arcs) ++indegree[s.graph->head(sa.arc)];
  const auto adj = support_adjacency(s);
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (const auto& [v, d] : indegree)
    if (d == 0) ready.push_back(v);
  while (!ready.empty()) {
    const auto v = ready.back();
    ready.pop_back();
    order.push_back(v);
    if (const auto it = adj.find(v); it != adj.end())
      for (const auto k : it->second)
        if (--indegree[s.graph->head(s.arcs[k].arc)] == 0) ready.push_back(s.graph->head(s.arcs[k].arc));
  }
  if (order.size() != s.nodes.size())
    throw Error(ErrorCode::CyclicSupport, fmt::format("support of demand {} has a directed cycle", s.demand));
  return order;
}

}  // namespace

SupportSubgraph extract_support(const FlowSolution& solution, Eigen::Index demand, double support_tol,
                                FlowScaling scaling) {
  const auto& sc = *solution.scenario;
  const auto m = static_cast<std::size_t>(demand);
  SupportSubgraph s;
  s.graph = std::shared_ptr<const IntermodalGraph>(solution.scenario, &sc.graph);
  s.demand = demand;
  s.origin = sc.origin_index[m];
  s.destination = sc.destination_index[m];
  s.tolerance = support_tol;
  s.rate = sc.demands[m].rate;
  s.scale = scaling == FlowScaling::PerUnit ? s.rate : 1.0;
  const auto col = solution.demand_flows.col(demand);
  for (Eigen::Index a = 0; a < col.size(); ++a) {
    const double v = col[a] / s.scale;
    if (v > support_tol) s.arcs.push_back({static_cast<std::size_t>(a), v});
  }
  if (s.arcs.empty())
    throw Error(ErrorCode::EmptySupport,
                fmt::format("demand {} carries no flow above {}", sc.demands[m].id.value, support_tol));
  s.nodes = incident_nodes(sc.graph, s.arcs);
  return s;
}

CanceledSupport cancel_cycles(const SupportSubgraph& support) {
  CanceledSupport out{support, 0, 0.0, 0.0};
  auto& s = out.support;
  while (true) {
    const auto cycle = find_cycle(s);
    if (cycle.empty()) break;
    double amount = std::numeric_limits<double>::infinity();
    double cycle_time = 0.0;
    for (const auto k : cycle) {
      amount = std::min(amount, s.arcs[k].flow);
      cycle_time += s.graph->arc(s.arcs[k].arc).travel_time;
    }
    for (const auto k : cycle) s.arcs[k].flow = s.arcs[k].flow == amount ? 0.0 : s.arcs[k].flow - amount;
    std::erase_if(s.arcs, [](const SupportArc& sa) { return sa.flow <= 0.0; });
    s.nodes = incident_nodes(*s.graph, s.arcs);
    ++out.cycles;
    out.removed_flow += amount;
    out.removed_time_mass += amount * cycle_time;
  }
  return out;
}

double count_paths(const SupportSubgraph& support, std::size_t origin, std::size_t destination) {
  const auto order = topological_order(support);
  const auto adj = support_adjacency(support);
  std::map<std::size_t, double> from;  // paths from node to destination
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    double n = v == destination ? 1.0 : 0.0;
    if (const auto a = adj.find(v); a != adj.end())
      for (const auto k : a->second) n += from[support.graph->head(support.arcs[k].arc)];
    from[v] = n;
  }
  const auto o = from.find(origin);
  return o == from.end() ? 0.0 : o->second;
}

PathSet enumerate_paths(const SupportSubgraph& support, std::size_t origin, std::size_t destination,
                        std::size_t cap) {
  const double total = count_paths(support, origin, destination);
  if (total > static_cast<double>(cap))
    throw Error(ErrorCode::PathExplosion,
                fmt::format("demand {} has {} paths, cap is {}", support.demand, total, cap));

  const auto adj = support_adjacency(support);
  const auto& g = *support.graph;
  PathSet out;
  out.demand = support.demand;
  std::vector<std::size_t> current;
  // Iterative DFS; out-arcs are visited in ascending arc order, which yields
  // paths in lexicographic order of arc ids.
  struct Frame {
    std::size_t node;
    std::size_t next = 0;
  };
  std::vector<Frame> stack{{origin, 0}};
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.node == destination && top.next == 0) {
      out.paths.push_back(current);
      top.next = std::numeric_limits<std::size_t>::max();
    }
    const auto it = adj.find(top.node);
    if (it == adj.end() || top.next >= it->second.size()) {
      stack.pop_back();
      if (!current.empty()) current.pop_back();
      continue;
    }
    const auto k = it->second[top.next++];
    current.push_back(support.arcs[k].arc);
    stack.push_back({g.head(support.arcs[k].arc), 0});
  }
  out.times.resize(static_cast<Eigen::Index>(out.paths.size()));
  for (std::size_t p = 0; p < out.paths.size(); ++p) {
    double t = 0.0;
    for (const auto a : out.paths[p]) t += g.arc(a).travel_time;
    out.times[static_cast<Eigen::Index>(p)] = t;
  }
  return out;
}

PathSet enumerate_paths(const SupportSubgraph& support, std::size_t cap) {
  return enumerate_paths(support, support.origin, support.destination, cap);
}

PathAllocation allocate_paths(const PathSet& paths, const SupportSubgraph& support, double time_threshold) {
  if (paths.count() == 0)
    throw Error(ErrorCode::ReconstructionInfeasible,
                fmt::format("demand {} has no origin-destination path in its support", support.demand));
  const auto np = static_cast<Eigen::Index>(paths.count());
  // A path never carries more than the flow leaving the origin.
  double upper = 0.0;
  for (const auto& sa : support.arcs)
    if (support.graph->tail(sa.arc) == support.origin) upper += sa.flow;

  std::map<std::size_t, std::size_t> row_of_arc;
  for (std::size_t k = 0; k < support.arcs.size(); ++k) row_of_arc[support.arcs[k].arc] = k;
  std::vector<std::vector<lp::Term<double>>> rows(support.arcs.size());
  lp::LpModel model;
  for (Eigen::Index p = 0; p < np; ++p) {
    const double excess = std::max(0.0, paths.times[p] - time_threshold);
    model.add_variable(0.0, upper, excess, fmt::format("P{}", p));
    for (const auto a : paths.paths[static_cast<std::size_t>(p)]) {
      const auto r = row_of_arc.find(a);
      if (r == row_of_arc.end())
        throw Error(ErrorCode::Internal, fmt::format("path {} leaves the support", p));
      rows[r->second].push_back({p, 1.0});
    }
  }
  for (std::size_t k = 0; k < support.arcs.size(); ++k)
    model.add_row(std::move(rows[k]), lp::Relation::Equal, support.arcs[k].flow);

  const auto sol = lp::solve_simplex(model);
  if (sol.status != lp::Status::Optimal)
    throw Error(ErrorCode::ReconstructionInfeasible,
                fmt::format("demand {}: path LP ended {}", support.demand, lp::to_string(sol.status)));

  PathAllocation out;
  out.demand = support.demand;
  out.scale = support.scale;
  out.rate = support.rate;
  out.scaling = support.scale == support.rate ? FlowScaling::PerUnit : FlowScaling::Absolute;
  out.paths = paths;
  out.fractions = sol.x;
  out.objective = sol.objective_value;
  out.excess = support.per_user(out.objective);
  out.path_time = support.per_user(paths.times.dot(sol.x));
  for (std::size_t k = 0; k < support.arcs.size(); ++k) {
    out.flow_time += support.graph->arc(support.arcs[k].arc).travel_time * support.arcs[k].flow;
    out.residual = std::max(out.residual, std::abs(model.row_activity(k, sol.x) - support.arcs[k].flow));
  }
  out.flow_time = support.per_user(out.flow_time);
  return out;
}

AllocationResult run_algorithm1(const FlowSolution& solution, double time_threshold,
                                const AllocationOptions& options) {
  const auto& sc = *solution.scenario;
  // Demand visiting order: by region, then by demand within the region.
  std::vector<std::size_t> order;
  std::map<std::int64_t, std::size_t> demand_lookup;
  for (std::size_t m = 0; m < sc.num_demands(); ++m) demand_lookup.emplace(sc.demands[m].id.value, m);
  for (const auto& region : sc.regions)
    for (const auto id : region.demands) order.push_back(demand_lookup.at(id.value));

  std::vector<std::optional<PathAllocation>> slots(sc.num_demands());
  std::vector<std::optional<DemandFailure>> failed(sc.num_demands());

  auto work = [&](std::size_t m) {
    try {
      const auto support = extract_support(solution, static_cast<Eigen::Index>(m), options.support_tol,
                                           options.scaling);
      const auto canceled = cancel_cycles(support);
      const auto paths = enumerate_paths(canceled.support, options.path_cap);
      auto alloc = allocate_paths(paths, canceled.support, time_threshold);
      alloc.scaling = options.scaling;
      alloc.canceled_cycles = canceled.cycles;
      alloc.removed_time_mass = support.per_user(canceled.removed_time_mass);
      slots[m] = std::move(alloc);
    } catch (const Error& e) {
      failed[m] = DemandFailure{sc.demands[m].id, e.code(), e.what()};
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(order.size())));
  if (threads <= 1) {
    for (const auto m : order) work(m);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < order.size(); i = next++) work(order[i]);
      });
  }

  AllocationResult out;
  for (const auto m : order)
    if (slots[m]) out.total += slots[m]->objective;
  for (std::size_t m = 0; m < sc.num_demands(); ++m) {
    if (slots[m]) out.per_demand.push_back(std::move(*slots[m]));
    if (failed[m]) out.failures.push_back(std::move(*failed[m]));
  }
  return out;
}

Eigen::VectorXd path_excess(const std::vector<PathAllocation>& allocations, const Scenario& scenario) {
  Eigen::VectorXd excess = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scenario.num_demands()));
  for (const auto& a : allocations) excess[a.demand] = a.excess;
  return excess;
}

double path_unfairness_summary(const std::vector<PathAllocation>& allocations, const Scenario& scenario) {
  return population_weighted(scenario, region_unfairness(scenario, path_excess(allocations, scenario)));
}

std::string write_allocation_csv(const std::vector<PathAllocation>& allocations, const Scenario& scenario,
                                 std::string_view manifest_id) {
  std::string out = fmt::format("# iamod-allocation v1 manifest={}\n", manifest_id);
  out += "demand_id,path_index,fraction,path_time_min,excess_min\n";
  for (const auto& a : allocations) {
    const auto id = scenario.demands[static_cast<std::size_t>(a.demand)].id.value;
    const double T = scenario.params.time_threshold;
    for (Eigen::Index p = 0; p < a.fractions.size(); ++p)
      out += fmt::format("{},{},{},{},{}\n", id, p, a.fractions[p] * a.scale / a.rate,
                         a.paths.times[p], std::max(0.0, a.paths.times[p] - T));
  }
  return out;
}

std::string write_paths_csv(const std::vector<PathAllocation>& allocations, const Scenario& scenario,
                            std::string_view manifest_id) {
  const auto& g = scenario.graph;
  std::string out = fmt::format("# iamod-paths v1 manifest={}\n", manifest_id);
  out += "demand_id,node_sequence\n";
  for (const auto& a : allocations) {
    const auto id = scenario.demands[static_cast<std::size_t>(a.demand)].id.value;
    for (const auto& path : a.paths.paths) {
      std::string seq = fmt::format("{}", g.node(g.tail(path.front())).id.value);
      for (const auto arc : path) seq += fmt::format(" {}", g.node(g.head(arc)).id.value);
      out += fmt::format("{},{}\n", id, seq);
    }
  }
  return out;
}

}  // namespace iamod
