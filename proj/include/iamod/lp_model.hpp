#pragma once

#include "iamod/error.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace iamod::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };

template <typename Scalar>
struct Term {
  Eigen::Index col = 0;
  Scalar coef = Scalar(0);
};

template <typename Scalar>
struct Row {
  std::vector<Term<Scalar>> terms;
  Relation relation = Relation::Equal;
  Scalar rhs = Scalar(0);
  std::string name;
};

/// Solver-agnostic LP in the form
///   min c'x  s.t.  row_i(x) {<=,=,>=} rhs_i,  lower <= x <= upper.
template <typename Scalar>
class Model {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  Eigen::Index add_variable(Scalar lower = Scalar(0), Scalar upper = kInf, Scalar cost = Scalar(0),
                            std::string name = {}) {
    const auto j = num_vars();
    objective_.conservativeResize(j + 1);
    lower_.conservativeResize(j + 1);
    upper_.conservativeResize(j + 1);
    objective_[j] = cost;
    lower_[j] = lower;
    upper_[j] = upper;
    var_names_.push_back(std::move(name));
    return j;
  }

  /// Appends `count` variables sharing bounds and zero cost; returns the first index.
  Eigen::Index add_variables(Eigen::Index count, Scalar lower = Scalar(0), Scalar upper = kInf) {
    const auto first = num_vars();
    objective_.conservativeResize(first + count);
    lower_.conservativeResize(first + count);
    upper_.conservativeResize(first + count);
    objective_.tail(count).setZero();
    lower_.tail(count).setConstant(lower);
    upper_.tail(count).setConstant(upper);
    var_names_.resize(static_cast<std::size_t>(first + count));
    return first;
  }

  std::size_t add_row(std::vector<Term<Scalar>> terms, Relation relation, Scalar rhs,
                      std::string name = {}) {
    rows_.push_back(Row<Scalar>{std::move(terms), relation, rhs, std::move(name)});
    return rows_.size() - 1;
  }

  void set_cost(Eigen::Index j, Scalar c) { objective_[j] = c; }
  void set_bounds(Eigen::Index j, Scalar lower, Scalar upper) {
    lower_[j] = lower;
    upper_[j] = upper;
  }
  void set_var_name(Eigen::Index j, std::string name) {
    var_names_[static_cast<std::size_t>(j)] = std::move(name);
  }

  Eigen::Index num_vars() const { return objective_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

  const Vector& objective() const { return objective_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<Row<Scalar>>& rows() const { return rows_; }
  const Row<Scalar>& row(std::size_t i) const { return rows_[i]; }
  const std::string& var_name(Eigen::Index j) const { return var_names_[static_cast<std::size_t>(j)]; }

  /// Throws ModelInvalid if an index is out of range, a row repeats a column,
  /// a bound pair is inverted or any datum is NaN.
  void validate() const {
    for (Eigen::Index j = 0; j < num_vars(); ++j) {
      if (std::isnan(objective_[j]) || std::isnan(lower_[j]) || std::isnan(upper_[j]))
        throw Error(ErrorCode::ModelInvalid, "NaN in column " + std::to_string(j));
      if (lower_[j] > upper_[j] || lower_[j] == kInf || upper_[j] == -kInf)
        throw Error(ErrorCode::ModelInvalid, "bad bounds on column " + std::to_string(j));
    }
    std::vector<Eigen::Index> seen;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (!std::isfinite(static_cast<double>(r.rhs)))
        throw Error(ErrorCode::ModelInvalid, "non-finite rhs in row " + std::to_string(i));
      seen.clear();
      for (const auto& t : r.terms) {
        if (t.col < 0 || t.col >= num_vars())
          throw Error(ErrorCode::ModelInvalid, "column index out of range in row " + std::to_string(i));
        if (!std::isfinite(static_cast<double>(t.coef)))
          throw Error(ErrorCode::ModelInvalid, "non-finite coefficient in row " + std::to_string(i));
        seen.push_back(t.col);
      }
      std::ranges::sort(seen);
      if (std::ranges::adjacent_find(seen) != seen.end())
        throw Error(ErrorCode::ModelInvalid, "duplicate column in row " + std::to_string(i));
    }
  }

  /// Row-major constraint matrix (rows in insertion order).
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> constraint_matrix() const {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& t : rows_[i].terms)
        triplets.emplace_back(static_cast<Eigen::Index>(i), t.col, t.coef);
    Eigen::SparseMatrix<Scalar, Eigen::RowMajor> a(static_cast<Eigen::Index>(rows_.size()), num_vars());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
  }

  Scalar row_activity(std::size_t i, const Vector& x) const {
    Scalar s(0);
    for (const auto& t : rows_[i].terms) s += t.coef * x[t.col];
    return s;
  }

  /// Largest absolute violation of any row or bound at `x`.
  Scalar max_violation(const Vector& x) const {
    Scalar worst(0);
    for (Eigen::Index j = 0; j < num_vars(); ++j) {
      worst = std::max(worst, lower_[j] - x[j]);
      worst = std::max(worst, x[j] - upper_[j]);
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Scalar lhs = row_activity(i, x);
      const auto& r = rows_[i];
      switch (r.relation) {
        case Relation::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
        case Relation::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
        case Relation::Equal: worst = std::max(worst, Scalar(std::abs(lhs - r.rhs))); break;
      }
    }
    return worst;
  }

 private:
  Vector objective_;
  Vector lower_;
  Vector upper_;
  std::vector<Row<Scalar>> rows_;
  std::vector<std::string> var_names_;
};

using LpModel = Model<double>;

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

template <typename Scalar>
struct Solution {
  Status status = Status::Infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective_value = Scalar(0);
  long iterations = 0;
  Scalar max_violation = Scalar(0);
};

using LpSolution = Solution<double>;

}  // namespace iamod::lp
