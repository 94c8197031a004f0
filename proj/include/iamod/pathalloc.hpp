#pragma once

#include "iamod/planner.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace iamod {

/// How support flows are expressed. PerUnit divides x^m by alpha_m so path
/// fractions lie in [0, 1] and sum to 1; Absolute keeps users/minute and
/// bounds fractions by alpha_m.
enum class FlowScaling { PerUnit, Absolute };

struct SupportArc {
  std::size_t arc = 0;  // graph arc index
  double flow = 0.0;
};

/// Arcs of one demand carrying more than `tolerance` flow.
struct SupportSubgraph {
  std::shared_ptr<const IntermodalGraph> graph;
  Eigen::Index demand = 0;
  std::size_t origin = 0;       // graph node index
  std::size_t destination = 0;  // graph node index
  std::vector<SupportArc> arcs;  // ascending arc index
  std::vector<std::size_t> nodes;
  double tolerance = 1e-9;
  double scale = 1.0;  // flows are x^m / scale
  double rate = 1.0;   // alpha_m

  /// Converts a support-unit quantity to a per-user one.
  double per_user(double v) const { return v * scale / rate; }
};

SupportSubgraph extract_support(const FlowSolution& solution, Eigen::Index demand,
                                double support_tol = 1e-9,
                                FlowScaling scaling = FlowScaling::PerUnit);

struct CanceledSupport {
  SupportSubgraph support;
  std::size_t cycles = 0;
  double removed_flow = 0.0;       // sum of canceled cycle amounts, support units
  double removed_time_mass = 0.0;  // sum over cycles of amount * cycle time
};

/// Removes flow around directed cycles until the support is acyclic. Node
/// imbalances are unchanged.
CanceledSupport cancel_cycles(const SupportSubgraph& support);

struct PathSet {
  Eigen::Index demand = 0;
  std::vector<std::vector<std::size_t>> paths;  // arc indices, origin to destination
  Eigen::VectorXd times;                        // minutes, exact sums of arc times

  std::size_t count() const { return paths.size(); }
};

/// All origin-destination paths of an acyclic support, in lexicographic order
/// of their arc ids. Throws PathExplosion when there are more than `cap`, and
/// CyclicSupport if the support has a directed cycle.
PathSet enumerate_paths(const SupportSubgraph& support, std::size_t origin, std::size_t destination,
                        std::size_t cap);
PathSet enumerate_paths(const SupportSubgraph& support, std::size_t cap);

/// Number of origin-destination paths in an acyclic support (saturates at +inf).
double count_paths(const SupportSubgraph& support, std::size_t origin, std::size_t destination);

struct PathAllocation {
  Eigen::Index demand = 0;
  FlowScaling scaling = FlowScaling::PerUnit;
  double scale = 1.0;
  double rate = 1.0;
  PathSet paths;
  Eigen::VectorXd fractions;   // support units
  double objective = 0.0;      // sum_p max{0, t_p - T_max} f_p, support units
  double excess = 0.0;         // the same per user, minutes
  double residual = 0.0;       // max arc reconstruction error
  double path_time = 0.0;      // sum_p t_p f_p, per user
  double flow_time = 0.0;      // t x on the canceled support, per user
  std::size_t canceled_cycles = 0;
  double removed_time_mass = 0.0;  // per user, minutes
};

/// Chooses path flows that reproduce the support exactly while minimizing the
/// time spent above `time_threshold`.
PathAllocation allocate_paths(const PathSet& paths, const SupportSubgraph& support, double time_threshold);

struct AllocationOptions {
  double support_tol = 1e-9;
  std::size_t path_cap = 100000;
  FlowScaling scaling = FlowScaling::PerUnit;
  unsigned threads = 1;
};

struct DemandFailure {
  DemandId demand;
  ErrorCode code = ErrorCode::Internal;
  std::string message;
};

struct AllocationResult {
  double total = 0.0;                       // sum of per-demand objectives
  std::vector<PathAllocation> per_demand;   // successful demands, ascending demand index
  std::vector<DemandFailure> failures;
};

/// Visits every region and each of its demands: support, cycle canceling,
/// enumeration and allocation. A failing demand is recorded and skipped.
AllocationResult run_algorithm1(const FlowSolution& solution, double time_threshold,
                                const AllocationOptions& options = {});

/// Per-user path excess of each demand (zero for demands without an allocation).
Eigen::VectorXd path_excess(const std::vector<PathAllocation>& allocations, const Scenario& scenario);

/// Region- and population-weighted mean of per-user path excess.
double path_unfairness_summary(const std::vector<PathAllocation>& allocations, const Scenario& scenario);

std::string write_allocation_csv(const std::vector<PathAllocation>& allocations, const Scenario& scenario,
                                 std::string_view manifest_id);
std::string write_paths_csv(const std::vector<PathAllocation>& allocations, const Scenario& scenario,
                            std::string_view manifest_id);

}  // namespace iamod
