#pragma once

#include "iamod/pathalloc.hpp"
#include "iamod/planner.hpp"

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iamod {

enum class HistogramBasis { OdPair, Path };

std::string_view to_string(HistogramBasis basis);

/// One travel-time bin [lower, upper). `time_mass[c]` is the user-weighted
/// time (minutes * users/minute) spent on arcs of mode class c.
struct ModalShareBin {
  double lower = 0.0;
  double upper = 0.0;
  double weight = 0.0;  // users/minute
  std::array<double, kNumModeClasses> time_mass{};

  double total_mass() const;
  double share(ModeClass mode) const;
  /// Mean travel time of the users in the bin.
  double average_time() const;
};

/// Demands binned by their average travel time, weighted by alpha_m.
std::vector<ModalShareBin> modal_share_histogram(const FlowSolution& solution, double bin_width = 2.0);

/// Paths binned by their exact travel time, weighted by f_p * alpha_m.
std::vector<ModalShareBin> modal_share_histogram(const std::vector<PathAllocation>& allocations,
                                                 const Scenario& scenario, double bin_width = 2.0);

/// Per-bin, per-class difference a - b over the union of bins; a bin absent
/// from one side counts as zero.
std::vector<ModalShareBin> histogram_difference(const std::vector<ModalShareBin>& a,
                                                const std::vector<ModalShareBin>& b);

std::string write_histogram_csv(const std::vector<ModalShareBin>& bins, std::string_view manifest_id);

/// Stacked-bar chart of time mass per class; negative masses (differences)
/// are drawn below the axis.
std::string write_histogram_svg(const std::vector<ModalShareBin>& bins, std::string_view title,
                                std::string_view manifest_id);

struct RegionRow {
  RegionId region;
  double population = 0.0;
  double unfairness = 0.0;  // minutes
};

std::vector<RegionRow> region_unfairness_table(const FlowSolution& solution);
std::vector<RegionRow> region_unfairness_table(const Scenario& scenario, const Eigen::VectorXd& excess);
std::string write_region_table_csv(const std::vector<RegionRow>& rows, std::string_view manifest_id);

/// Identity of a run: input hashes, parameters and tool version. The id does
/// not depend on the timestamp.
struct RunManifest {
  std::string version;
  std::map<std::string, std::string> file_hashes;  // file name -> sha256 hex
  Parameters params;
  std::string solver = "bundled-simplex";
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  std::string timestamp;  // empty when deterministic

  std::string id() const;
  std::string to_json() const;
};

std::string sha256_hex(std::string_view data);

extern const char* const kVersion;

}  // namespace iamod
