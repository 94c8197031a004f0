#include "iamod/planner.hpp"

#include "iamod/error.hpp"
#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace iamod {

std::string_view to_string(Objective objective) {
  return objective == Objective::MinTime ? "time" : "fairness";
}

std::optional<Objective> parse_objective(std::string_view text) {
  if (text == "time") return Objective::MinTime;
  if (text == "fairness") return Objective::MinUnfairness;
  return std::nullopt;
}

VariableLayout VariableLayout::for_scenario(const Scenario& scenario, bool with_slacks) {
  VariableLayout layout;
  const auto& g = scenario.graph;
  layout.num_demands = static_cast<Eigen::Index>(scenario.num_demands());
  layout.num_arcs = static_cast<Eigen::Index>(g.num_arcs());
  layout.with_slacks = with_slacks;
  layout.car_slot.assign(g.num_arcs(), -1);
  for (const auto a : g.layer_arcs(Layer::Car)) layout.car_slot[a] = layout.num_car_arcs++;
  return layout;
}

void add_layout_variables(const Scenario& scenario, const VariableLayout& layout, lp::LpModel& model) {
  model.add_variables(layout.width());
  for (Eigen::Index m = 0; m < layout.num_demands; ++m)
    for (Eigen::Index a = 0; a < layout.num_arcs; ++a)
      model.set_var_name(layout.flow(m, a), fmt::format("F{}_{}", m, a));
  for (Eigen::Index k = 0; k < layout.num_car_arcs; ++k)
    model.set_var_name(layout.rebalancing(k), fmt::format("R{}", k));
  if (layout.with_slacks)
    for (Eigen::Index m = 0; m < layout.num_demands; ++m)
      model.set_var_name(layout.slack(m), fmt::format("E{}", m));
  (void)scenario;
}

std::size_t assemble_flow_balance(const Scenario& scenario, const VariableLayout& layout,
                                  lp::LpModel& model) {
  const auto& g = scenario.graph;
  std::size_t added = 0;
  for (Eigen::Index m = 0; m < layout.num_demands; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const double alpha = scenario.demands[mi].rate;
    for (std::size_t j = 0; j < g.num_nodes(); ++j) {
      std::vector<lp::Term<double>> terms;
      for (const auto a : g.out_arcs(j)) terms.push_back({layout.flow(m, static_cast<Eigen::Index>(a)), 1.0});
      for (const auto a : g.in_arcs(j)) terms.push_back({layout.flow(m, static_cast<Eigen::Index>(a)), -1.0});
      double rhs = 0.0;
      if (j == scenario.origin_index[mi]) rhs += alpha;
      if (j == scenario.destination_index[mi]) rhs -= alpha;
      model.add_row(std::move(terms), lp::Relation::Equal, rhs, fmt::format("B{}_{}", m, j));
      ++added;
    }
  }
  return added;
}

std::size_t assemble_car_balance(const Scenario& scenario, const VariableLayout& layout,
                                 lp::LpModel& model) {
  const auto& g = scenario.graph;
  std::size_t added = 0;
  for (const auto j : g.layer_nodes(Layer::Car)) {
    std::vector<lp::Term<double>> terms;
    auto add_arc = [&](std::size_t a, double sign) {
      const auto slot = layout.car_slot[a];
      if (slot < 0) return;
      terms.push_back({layout.rebalancing(slot), sign});
      for (Eigen::Index m = 0; m < layout.num_demands; ++m)
        terms.push_back({layout.flow(m, static_cast<Eigen::Index>(a)), sign});
    };
    for (const auto a : g.out_arcs(j)) add_arc(a, 1.0);
    for (const auto a : g.in_arcs(j)) add_arc(a, -1.0);
    model.add_row(std::move(terms), lp::Relation::Equal, 0.0, fmt::format("K{}", j));
    ++added;
  }
  return added;
}

std::size_t assemble_fleet_cap(const Scenario& scenario, const VariableLayout& layout,
                               lp::LpModel& model) {
  const double cap = scenario.params.fleet_cap;
  if (std::isinf(cap)) return 0;
  const auto& g = scenario.graph;
  std::vector<lp::Term<double>> terms;
  for (const auto a : g.layer_arcs(Layer::Car)) {
    const double t = g.arc(a).travel_time;
    if (t == 0.0) continue;
    terms.push_back({layout.rebalancing(layout.car_slot[a]), t});
    for (Eigen::Index m = 0; m < layout.num_demands; ++m)
      terms.push_back({layout.flow(m, static_cast<Eigen::Index>(a)), t});
  }
  model.add_row(std::move(terms), lp::Relation::LessEqual, cap, "FLEET");
  return 1;
}

std::size_t assemble_slack_constraints(const Scenario& scenario, const VariableLayout& layout,
                                       lp::LpModel& model) {
  const auto& t = scenario.graph.travel_times();
  for (Eigen::Index m = 0; m < layout.num_demands; ++m) {
    const double alpha = scenario.demands[static_cast<std::size_t>(m)].rate;
    std::vector<lp::Term<double>> terms;
    for (Eigen::Index a = 0; a < layout.num_arcs; ++a)
      if (t[a] != 0.0) terms.push_back({layout.flow(m, a), t[a] / alpha});
    terms.push_back({layout.slack(m), -1.0});
    model.add_row(std::move(terms), lp::Relation::LessEqual, scenario.params.time_threshold,
                  fmt::format("S{}", m));
  }
  return static_cast<std::size_t>(layout.num_demands);
}

Eigen::VectorXd objective_time(const Scenario& scenario, const VariableLayout& layout) {
  const auto& g = scenario.graph;
  const auto& t = g.travel_times();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.width());
  for (Eigen::Index m = 0; m < layout.num_demands; ++m)
    c.segment(layout.flow(m, 0), layout.num_arcs) = t;
  for (const auto a : g.layer_arcs(Layer::Car))
    c[layout.rebalancing(layout.car_slot[a])] = scenario.params.gamma_reb * t[static_cast<Eigen::Index>(a)];
  return c;
}

Eigen::VectorXd slack_weights(const Scenario& scenario) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scenario.num_demands()));
  const double population = scenario.total_population();
  if (population <= 0.0) return w;
  std::vector<double> region_rate(scenario.regions.size(), 0.0);
  for (std::size_t m = 0; m < scenario.num_demands(); ++m)
    region_rate[scenario.region_index[m]] += scenario.demands[m].rate;
  for (std::size_t m = 0; m < scenario.num_demands(); ++m) {
    const auto r = scenario.region_index[m];
    w[static_cast<Eigen::Index>(m)] =
        (scenario.regions[r].population / population) * (scenario.demands[m].rate / region_rate[r]);
  }
  return w;
}

Eigen::VectorXd objective_unfairness(const Scenario& scenario, const VariableLayout& layout) {
  Eigen::VectorXd c = scenario.params.gamma_time * objective_time(scenario, layout);
  if (layout.with_slacks) c.segment(layout.slack_offset(), layout.num_demands) = slack_weights(scenario);
  return c;
}

lp::LpModel build_model(const Scenario& scenario, Objective objective) {
  const bool slacks = objective == Objective::MinUnfairness;
  const auto layout = VariableLayout::for_scenario(scenario, slacks);
  lp::LpModel model;
  add_layout_variables(scenario, layout, model);
  assemble_flow_balance(scenario, layout, model);
  assemble_car_balance(scenario, layout, model);
  assemble_fleet_cap(scenario, layout, model);
  if (slacks) assemble_slack_constraints(scenario, layout, model);
  const Eigen::VectorXd c =
      slacks ? objective_unfairness(scenario, layout) : objective_time(scenario, layout);
  for (Eigen::Index j = 0; j < c.size(); ++j) model.set_cost(j, c[j]);
  return model;
}

namespace {

double user_time(const FlowSolution& s) {
  return (s.scenario->graph.travel_times().transpose() * s.demand_flows).sum();
}

double rebalancing_time(const FlowSolution& s) {
  const auto& g = s.scenario->graph;
  double total = 0.0;
  const auto cars = g.layer_arcs(Layer::Car);
  for (std::size_t k = 0; k < cars.size(); ++k)
    total += g.arc(cars[k]).travel_time * s.rebalancing[static_cast<Eigen::Index>(k)];
  return total;
}

void finish_objectives(FlowSolution& s) {
  const auto& p = s.scenario->params;
  s.j_time = user_time(s) + p.gamma_reb * rebalancing_time(s);
  s.j_acc = slack_weights(*s.scenario).dot(s.slacks);
  s.objective_value =
      s.objective == Objective::MinTime ? s.j_time : s.j_acc + p.gamma_time * s.j_time;
}

}  // namespace

double analytic_slack(const FlowSolution& solution, Eigen::Index demand) {
  const auto& sc = *solution.scenario;
  const double alpha = sc.demands[static_cast<std::size_t>(demand)].rate;
  const double avg = sc.graph.travel_times().dot(solution.demand_flows.col(demand)) / alpha;
  return std::max(0.0, avg - sc.params.time_threshold);
}

FlowSolution solution_from_columns(std::shared_ptr<const Scenario> scenario, Objective objective,
                                   const Eigen::VectorXd& x) {
  const auto layout = VariableLayout::for_scenario(*scenario, objective == Objective::MinUnfairness);
  if (x.size() != layout.width())
    throw Error(ErrorCode::Internal, fmt::format("solution has {} columns, layout expects {}",
                                                 x.size(), layout.width()));
  FlowSolution s;
  s.scenario = std::move(scenario);
  s.objective = objective;
  s.demand_flows = Eigen::Map<const Eigen::MatrixXd>(x.data(), layout.num_arcs, layout.num_demands);
  s.rebalancing = x.segment(layout.rebalancing_offset(), layout.num_car_arcs);
  s.slacks.resize(layout.num_demands);
  if (layout.with_slacks) {
    const Eigen::VectorXd w = slack_weights(*s.scenario);
    for (Eigen::Index m = 0; m < layout.num_demands; ++m) {
      // A zero-weight slack is free in the objective; pin it to its bound.
      s.slacks[m] = w[m] > 0.0 ? x[layout.slack(m)] : analytic_slack(s, m);
    }
  } else {
    for (Eigen::Index m = 0; m < layout.num_demands; ++m) s.slacks[m] = analytic_slack(s, m);
  }
  finish_objectives(s);
  return s;
}

FlowSolution solve(std::shared_ptr<const Scenario> scenario, Objective objective,
                   const lp::SimplexOptions<double>& options) {
  const auto model = build_model(*scenario, objective);
  const auto lp_solution = lp::solve_simplex(model, options);
  switch (lp_solution.status) {
    case lp::Status::Optimal: break;
    case lp::Status::Infeasible:
      throw Error(ErrorCode::Infeasible,
                  "no flow satisfies balance and fleet constraints (unreachable destination or cap too low)");
    case lp::Status::Unbounded: throw Error(ErrorCode::Unbounded, "flow LP is unbounded");
    case lp::Status::IterationLimit:
      throw Error(ErrorCode::IterationLimit,
                  fmt::format("simplex stopped after {} iterations", lp_solution.iterations));
  }
  auto s = solution_from_columns(std::move(scenario), objective, lp_solution.x);
  s.iterations = lp_solution.iterations;
  return s;
}

FlowSolution solve_min_time(std::shared_ptr<const Scenario> scenario,
                            const lp::SimplexOptions<double>& options) {
  return solve(std::move(scenario), Objective::MinTime, options);
}

FlowSolution solve_min_unfairness(std::shared_ptr<const Scenario> scenario,
                                  const lp::SimplexOptions<double>& options) {
  return solve(std::move(scenario), Objective::MinUnfairness, options);
}

Eigen::VectorXd region_unfairness(const Scenario& scenario, const Eigen::VectorXd& excess) {
  const auto nr = static_cast<Eigen::Index>(scenario.regions.size());
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(nr);
  Eigen::VectorXd rate = Eigen::VectorXd::Zero(nr);
  for (std::size_t m = 0; m < scenario.num_demands(); ++m) {
    const auto r = static_cast<Eigen::Index>(scenario.region_index[m]);
    weighted[r] += scenario.demands[m].rate * excess[static_cast<Eigen::Index>(m)];
    rate[r] += scenario.demands[m].rate;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nr);
  for (Eigen::Index r = 0; r < nr; ++r)
    if (rate[r] > 0.0) u[r] = weighted[r] / rate[r];
  return u;
}

double population_weighted(const Scenario& scenario, const Eigen::VectorXd& per_region) {
  const double population = scenario.total_population();
  if (population <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < scenario.regions.size(); ++r)
    acc += scenario.regions[r].population * per_region[static_cast<Eigen::Index>(r)];
  return acc / population;
}

FlowMetrics flow_metrics(const FlowSolution& solution) {
  const auto& sc = *solution.scenario;
  FlowMetrics out;
  out.user_time = user_time(solution);
  out.rebalancing_time = rebalancing_time(solution);
  out.j_time = out.user_time + sc.params.gamma_reb * out.rebalancing_time;
  out.region_u = region_unfairness(sc, solution.slacks);
  out.j_acc = population_weighted(sc, out.region_u);
  const double total_rate = total_demand_rate(sc);
  out.avg_travel_time = total_rate > 0.0 ? out.user_time / total_rate : 0.0;
  const auto& g = sc.graph;
  const auto cars = g.layer_arcs(Layer::Car);
  for (std::size_t k = 0; k < cars.size(); ++k) {
    const auto a = static_cast<Eigen::Index>(cars[k]);
    out.fleet_usage += g.travel_times()[a] *
                       (solution.rebalancing[static_cast<Eigen::Index>(k)] + solution.demand_flows.row(a).sum());
  }
  return out;
}

double max_balance_residual(const FlowSolution& solution) {
  const auto& sc = *solution.scenario;
  const auto& g = sc.graph;
  double worst = 0.0;
  for (std::size_t m = 0; m < sc.num_demands(); ++m) {
    const auto col = solution.demand_flows.col(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < g.num_nodes(); ++j) {
      double net = 0.0;
      for (const auto a : g.out_arcs(j)) net += col[static_cast<Eigen::Index>(a)];
      for (const auto a : g.in_arcs(j)) net -= col[static_cast<Eigen::Index>(a)];
      double expected = 0.0;
      if (j == sc.origin_index[m]) expected += sc.demands[m].rate;
      if (j == sc.destination_index[m]) expected -= sc.demands[m].rate;
      worst = std::max(worst, std::abs(net - expected));
    }
  }
  const auto layout = VariableLayout::for_scenario(sc, false);
  for (const auto j : g.layer_nodes(Layer::Car)) {
    double net = 0.0;
    auto vehicles = [&](std::size_t a) {
      return solution.rebalancing[layout.car_slot[a]] +
             solution.demand_flows.row(static_cast<Eigen::Index>(a)).sum();
    };
    for (const auto a : g.out_arcs(j))
      if (layout.car_slot[a] >= 0) net += vehicles(a);
    for (const auto a : g.in_arcs(j))
      if (layout.car_slot[a] >= 0) net -= vehicles(a);
    worst = std::max(worst, std::abs(net));
  }
  return worst;
}

std::string write_solution_csv(const FlowSolution& solution, std::string_view manifest_id) {
  const auto& sc = *solution.scenario;
  const auto& g = sc.graph;
  std::string out = fmt::format("# iamod-solution v1 objective={} manifest={}\n",
                                to_string(solution.objective), manifest_id);
  out += "demand_id,arc_id,flow\n";
  for (std::size_t m = 0; m < sc.num_demands(); ++m)
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
      const double v = solution.demand_flows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
      if (v != 0.0) out += fmt::format("{},{},{}\n", sc.demands[m].id.value, g.arc(a).id.value, v);
    }
  const auto cars = g.layer_arcs(Layer::Car);
  for (std::size_t k = 0; k < cars.size(); ++k) {
    const double v = solution.rebalancing[static_cast<Eigen::Index>(k)];
    if (v != 0.0) out += fmt::format("R,{},{}\n", g.arc(cars[k]).id.value, v);
  }
  return out;
}

FlowSolution read_solution_csv(std::shared_ptr<const Scenario> scenario, std::string_view text) {
  const auto& sc = *scenario;
  const auto& g = sc.graph;
  const auto layout = VariableLayout::for_scenario(sc, false);
  const auto rows = detail::lines(text);
  if (rows.empty() || !detail::trim(rows[0]).starts_with("# iamod-solution v1"))
    throw Error(ErrorCode::ParseError, "solution file lacks the '# iamod-solution v1' header");
  std::optional<Objective> objective;
  for (const auto& field : detail::split(detail::trim(rows[0]), ' '))
    if (field.starts_with("objective=")) objective = parse_objective(field.substr(10));
  if (!objective) throw Error(ErrorCode::ParseError, "solution header names no valid objective");

  std::unordered_map<std::int64_t, std::size_t> demand_lookup;
  for (std::size_t m = 0; m < sc.num_demands(); ++m) demand_lookup.emplace(sc.demands[m].id.value, m);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.width());
  bool header_seen = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split(line, ',');
    if (!header_seen) {
      if (cols != std::vector<std::string>{"demand_id", "arc_id", "flow"})
        throw Error(ErrorCode::ParseError, "solution column header must be demand_id,arc_id,flow");
      header_seen = true;
      continue;
    }
    const auto where = fmt::format("solution line {}", i + 1);
    if (cols.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected 3 columns");
    const auto arc = g.arc_index(ArcId{detail::parse_int(cols[1], where)});
    if (!arc) throw Error(ErrorCode::ParseError, where + ": unknown arc " + cols[1]);
    const double v = detail::parse_double(cols[2], where);
    if (cols[0] == "R") {
      const auto slot = layout.car_slot[*arc];
      if (slot < 0) throw Error(ErrorCode::ParseError, where + ": rebalancing on a non-car arc");
      x[layout.rebalancing(slot)] = v;
    } else {
      const auto d = demand_lookup.find(detail::parse_int(cols[0], where));
      if (d == demand_lookup.end()) throw Error(ErrorCode::ParseError, where + ": unknown demand " + cols[0]);
      x[layout.flow(static_cast<Eigen::Index>(d->second), static_cast<Eigen::Index>(*arc))] = v;
    }
  }
  // Slacks are not stored; recompute them from the flows.
  auto s = solution_from_columns(std::move(scenario), Objective::MinTime, x);
  s.objective = *objective;
  finish_objectives(s);
  return s;
}

std::string write_metrics(const FlowSolution& solution, std::string_view manifest_id) {
  const auto& sc = *solution.scenario;
  const auto m = flow_metrics(solution);
  std::string out = fmt::format("# iamod-metrics v1 manifest={}\n", manifest_id);
  out += fmt::format("objective = {}\n", to_string(solution.objective));
  out += fmt::format("objective_value = {}\n", solution.objective_value);
  out += fmt::format("j_time = {}\n", m.j_time);
  out += fmt::format("user_time = {}\n", m.user_time);
  out += fmt::format("rebalancing_time = {}\n", m.rebalancing_time);
  out += fmt::format("j_acc = {}\n", m.j_acc);
  out += fmt::format("avg_travel_time_min = {}\n", m.avg_travel_time);
  out += fmt::format("fleet_usage = {}\n", m.fleet_usage);
  out += fmt::format("fleet_cap = {}\n", sc.params.fleet_cap);
  out += fmt::format("t_max_min = {}\n", sc.params.time_threshold);
  out += fmt::format("gamma_reb = {}\n", sc.params.gamma_reb);
  out += fmt::format("gamma_time = {}\n", sc.params.gamma_time);
  out += fmt::format("total_demand_rate = {}\n", total_demand_rate(sc));
  for (std::size_t r = 0; r < sc.regions.size(); ++r)
    out += fmt::format("u_region.{} = {}\n", sc.regions[r].id.value, m.region_u[static_cast<Eigen::Index>(r)]);
  return out;
}

}  // namespace iamod
