#pragma once

#include "iamod/lp_model.hpp"
#include "iamod/scenario.hpp"
#include "iamod/simplex.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace iamod {

enum class Objective { MinTime, MinUnfairness };

std::string_view to_string(Objective objective);
std::optional<Objective> parse_objective(std::string_view text);

/// Column layout of the flow LPs: one block of |A| arc flows per demand, then
/// one rebalancing flow per car arc, then (min-unfairness only) one slack per
/// demand.
struct VariableLayout {
  Eigen::Index num_demands = 0;
  Eigen::Index num_arcs = 0;
  Eigen::Index num_car_arcs = 0;
  bool with_slacks = false;
  std::vector<Eigen::Index> car_slot;  // arc index -> position among car arcs, or -1

  static VariableLayout for_scenario(const Scenario& scenario, bool with_slacks);

  Eigen::Index flow(Eigen::Index demand, Eigen::Index arc) const { return demand * num_arcs + arc; }
  Eigen::Index rebalancing_offset() const { return num_demands * num_arcs; }
  Eigen::Index rebalancing(Eigen::Index car_arc) const { return rebalancing_offset() + car_arc; }
  Eigen::Index slack_offset() const { return rebalancing_offset() + num_car_arcs; }
  Eigen::Index slack(Eigen::Index demand) const { return slack_offset() + demand; }
  Eigen::Index width() const { return slack_offset() + (with_slacks ? num_demands : 0); }
};

/// Declares every column of `layout` (bounds, zero cost, MPS-friendly names).
void add_layout_variables(const Scenario& scenario, const VariableLayout& layout, lp::LpModel& model);

/// Per (demand m, node j): out(j) - in(j) = alpha_m (1[j = o_m] - 1[j = d_m]).
std::size_t assemble_flow_balance(const Scenario& scenario, const VariableLayout& layout,
                                  lp::LpModel& model);

/// Per car node: vehicle outflow equals vehicle inflow, counting rebalancing
/// and all demand flows on car arcs.
std::size_t assemble_car_balance(const Scenario& scenario, const VariableLayout& layout,
                                 lp::LpModel& model);

/// sum over car arcs of t_a (x^R_a + sum_m x^m_a) <= fleet cap. Skipped (returns 0)
/// when the cap is infinite.
std::size_t assemble_fleet_cap(const Scenario& scenario, const VariableLayout& layout,
                               lp::LpModel& model);

/// Per demand: sum_a (t_a / alpha_m) x^m_a - eps_m <= T_max.
std::size_t assemble_slack_constraints(const Scenario& scenario, const VariableLayout& layout,
                                       lp::LpModel& model);

/// t_a on demand flows, gamma_R t_a on rebalancing flows.
Eigen::VectorXd objective_time(const Scenario& scenario, const VariableLayout& layout);

/// Population/rate weight of each demand's slack in J_acc.
Eigen::VectorXd slack_weights(const Scenario& scenario);

/// Slack weights on eps_m plus gamma_time times the travel-time objective.
Eigen::VectorXd objective_unfairness(const Scenario& scenario, const VariableLayout& layout);

lp::LpModel build_model(const Scenario& scenario, Objective objective);

struct FlowSolution {
  std::shared_ptr<const Scenario> scenario;
  Objective objective = Objective::MinTime;
  Eigen::MatrixXd demand_flows;  // arcs x demands, users/minute
  Eigen::VectorXd rebalancing;   // one entry per car arc, in graph.layer_arcs(Car) order
  Eigen::VectorXd slacks;        // minutes, per demand
  double j_time = 0.0;
  double j_acc = 0.0;
  double objective_value = 0.0;
  long iterations = 0;
};

/// Builds a FlowSolution from a column vector laid out per `build_model`.
/// Slacks come from the vector for the min-unfairness model, and are computed
/// as max{0, t x^m / alpha_m - T_max} otherwise.
FlowSolution solution_from_columns(std::shared_ptr<const Scenario> scenario, Objective objective,
                                   const Eigen::VectorXd& x);

FlowSolution solve_min_time(std::shared_ptr<const Scenario> scenario,
                            const lp::SimplexOptions<double>& options = {});
FlowSolution solve_min_unfairness(std::shared_ptr<const Scenario> scenario,
                                  const lp::SimplexOptions<double>& options = {});
FlowSolution solve(std::shared_ptr<const Scenario> scenario, Objective objective,
                   const lp::SimplexOptions<double>& options = {});

/// max{0, t x^m / alpha_m - T_max}
double analytic_slack(const FlowSolution& solution, Eigen::Index demand);

/// Rate-weighted mean of per-demand excess within each region; zero for
/// regions without demand.
Eigen::VectorXd region_unfairness(const Scenario& scenario, const Eigen::VectorXd& excess);

/// Population-weighted mean of per-region values; zero when the total
/// population is zero.
double population_weighted(const Scenario& scenario, const Eigen::VectorXd& per_region);

struct FlowMetrics {
  double j_time = 0.0;           // travel-time objective incl. rebalancing regularization
  double user_time = 0.0;        // sum_m t x^m
  double rebalancing_time = 0.0; // sum t_a x^R_a
  double j_acc = 0.0;
  double avg_travel_time = 0.0;  // user_time / total demand rate
  double fleet_usage = 0.0;      // vehicles
  Eigen::VectorXd region_u;      // parallel to scenario.regions
};

FlowMetrics flow_metrics(const FlowSolution& solution);

/// Largest flow-balance residual (any node, any demand) and car-balance
/// residual; used by feasibility checks.
double max_balance_residual(const FlowSolution& solution);

/// Delimited export. Header line, then `demand_id,arc_id,flow` rows and
/// `R,arc_id,flow` rows; zero flows are omitted.
std::string write_solution_csv(const FlowSolution& solution, std::string_view manifest_id);
FlowSolution read_solution_csv(std::shared_ptr<const Scenario> scenario, std::string_view text);

std::string write_metrics(const FlowSolution& solution, std::string_view manifest_id);

}  // namespace iamod
