#pragma once

#include "iamod/lp_model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace iamod::lp {

/// Naming rules for fixed-format MPS:
///  - empty names default to C<j> (columns) and R<i> (rows);
///  - characters outside [A-Za-z0-9_.-] become '_';
///  - names are truncated to 8 characters;
///  - a name that is already taken gets its tail replaced by '~' plus a
///    base-36 counter (first free of ~1, ~2, ...), keeping 8 characters;
///  - the objective row is always COST, which no constraint row may take.
struct MpsOptions {
  bool resolve_collisions = true;  // false: a collision throws NameCollisionAfterSanitize
  std::string problem_name = "IAMOD";
  std::string comment;  // written as a leading `*` line when non-empty
};

struct MpsNames {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
};

inline constexpr std::string_view kMpsObjectiveRow = "COST";

MpsNames mps_names(const LpModel& model, const MpsOptions& options = {});

std::string export_mps(const LpModel& model, const MpsOptions& options = {});

/// Parses the subset of MPS written by export_mps (NAME, ROWS, COLUMNS, RHS,
/// BOUNDS, ENDATA; whitespace-delimited fields).
LpModel import_mps(std::string_view text);

struct ImportedSolution {
  LpSolution solution;
  bool infeasible = false;  // max violation above tolerance
  std::string worst_constraint;
};

/// Reads `name value` lines produced by an external solver. Names may be MPS
/// names or the model's own names. Unmentioned columns sit at their lower bound
/// (upper bound, or zero, when the lower bound is infinite).
ImportedSolution import_solution(const LpModel& model, std::string_view text, double tol = 1e-9);

std::string format_mps_number(double value);

}  // namespace iamod::lp
