#pragma once

#include "iamod/lp_model.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdint>
#include <vector>

namespace iamod::lp {

template <typename Scalar>
struct SimplexOptions {
  Scalar feasibility_tol = Scalar(1e-9);
  Scalar optimality_tol = Scalar(1e-9);
  Scalar pivot_tol = Scalar(1e-10);
  long max_iterations = 1'000'000;
  int refactor_interval = 100;
  int degenerate_streak = 50;  // consecutive degenerate steps before Bland's rule
};

namespace detail {

// Two-phase bounded-variable revised simplex on the standard form
//   min c'y  s.t.  A y = b,  0 <= y <= u
// with an explicit dense basis inverse kept up to date by eta updates and
// periodically refactorized. Pricing is Dantzig's rule; after a run of
// degenerate steps it switches to Bland's lowest-index rule until progress
// resumes, which rules out cycling.
template <typename Scalar>
class BoundedSimplex {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using Index = Eigen::Index;

  BoundedSimplex(const Model<Scalar>& model, const SimplexOptions<Scalar>& options)
      : model_(model), opt_(options) {
    build_standard_form();
  }

  Solution<Scalar> run() {
    init_basis();

    Vector phase1_cost = Vector::Zero(n_);
    for (Index j = first_artificial_; j < n_; ++j) phase1_cost[j] = Scalar(1);
    auto result = iterate(phase1_cost);
    if (result == Outcome::IterationLimit) return finish(Status::IterationLimit);
    refactor();
    Scalar infeasibility(0);
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] >= first_artificial_) infeasibility += std::abs(xb_[i]);
    const Scalar b_scale = Scalar(1) + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : Scalar(0));
    if (infeasibility > opt_.feasibility_tol * b_scale) return finish(Status::Infeasible);

    drive_out_artificials();
    for (Index j = first_artificial_; j < n_; ++j) upper_[j] = Scalar(0);

    result = iterate(cost_);
    refactor();
    if (result == Outcome::Unbounded) return finish(Status::Unbounded);
    if (result == Outcome::IterationLimit) return finish(Status::IterationLimit);
    return finish(Status::Optimal);
  }

 private:
  enum class Outcome { Optimal, Unbounded, IterationLimit };
  enum class State : std::uint8_t { Basic, AtLower, AtUpper };

  // x_orig = shift + sign * y[col] - (col2 >= 0 ? y[col2] : 0)
  struct ColumnMap {
    Index col = -1;
    Index col2 = -1;
    Scalar shift = Scalar(0);
    Scalar sign = Scalar(1);
  };

  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  void build_standard_form() {
    const Index nv = model_.num_vars();
    map_.resize(static_cast<std::size_t>(nv));
    std::vector<Scalar> upper;
    std::vector<Scalar> cost;
    for (Index j = 0; j < nv; ++j) {
      const Scalar lo = model_.lower()[j];
      const Scalar hi = model_.upper()[j];
      const Scalar c = model_.objective()[j];
      auto& mp = map_[static_cast<std::size_t>(j)];
      mp.col = static_cast<Index>(upper.size());
      if (std::isfinite(static_cast<double>(lo))) {
        mp.shift = lo;
        mp.sign = Scalar(1);
        upper.push_back(std::isfinite(static_cast<double>(hi)) ? hi - lo : kInf);
        cost.push_back(c);
      } else if (std::isfinite(static_cast<double>(hi))) {
        mp.shift = hi;
        mp.sign = Scalar(-1);
        upper.push_back(kInf);
        cost.push_back(-c);
      } else {
        upper.push_back(kInf);
        cost.push_back(c);
        mp.col2 = static_cast<Index>(upper.size());
        upper.push_back(kInf);
        cost.push_back(-c);
      }
    }

    m_ = static_cast<Index>(model_.num_rows());
    b_.resize(m_);
    std::vector<Eigen::Triplet<Scalar>> trip;
    for (Index i = 0; i < m_; ++i) {
      const auto& row = model_.row(static_cast<std::size_t>(i));
      Scalar rhs = row.rhs;
      for (const auto& t : row.terms) {
        const auto& mp = map_[static_cast<std::size_t>(t.col)];
        rhs -= t.coef * mp.shift;
        trip.emplace_back(i, mp.col, t.coef * mp.sign);
        if (mp.col2 >= 0) trip.emplace_back(i, mp.col2, -t.coef);
      }
      b_[i] = rhs;
    }

    // One slack per inequality row.
    for (Index i = 0; i < m_; ++i) {
      const auto rel = model_.row(static_cast<std::size_t>(i)).relation;
      if (rel == Relation::Equal) continue;
      const Index col = static_cast<Index>(upper.size());
      trip.emplace_back(i, col, rel == Relation::LessEqual ? Scalar(1) : Scalar(-1));
      slack_of_row_.emplace_back(i, col);
      upper.push_back(kInf);
      cost.push_back(Scalar(0));
    }

    // Initial basis: a slack where it is feasible at zero structurals,
    // otherwise an artificial with the sign of the rhs.
    first_artificial_ = static_cast<Index>(upper.size());
    initial_basis_.assign(static_cast<std::size_t>(m_), -1);
    for (const auto& [i, col] : slack_of_row_) {
      const auto rel = model_.row(static_cast<std::size_t>(i)).relation;
      if ((rel == Relation::LessEqual && b_[i] >= Scalar(0)) ||
          (rel == Relation::GreaterEqual && b_[i] <= Scalar(0)))
        initial_basis_[static_cast<std::size_t>(i)] = col;
    }
    for (Index i = 0; i < m_; ++i) {
      if (initial_basis_[static_cast<std::size_t>(i)] >= 0) continue;
      const Index col = static_cast<Index>(upper.size());
      trip.emplace_back(i, col, b_[i] >= Scalar(0) ? Scalar(1) : Scalar(-1));
      initial_basis_[static_cast<std::size_t>(i)] = col;
      upper.push_back(kInf);
      cost.push_back(Scalar(0));
    }

    n_ = static_cast<Index>(upper.size());
    a_.resize(m_, n_);
    a_.setFromTriplets(trip.begin(), trip.end());
    a_.makeCompressed();
    upper_ = Eigen::Map<Vector>(upper.data(), n_);
    cost_ = Eigen::Map<Vector>(cost.data(), n_);
  }

  void init_basis() {
    basis_ = initial_basis_;
    state_.assign(static_cast<std::size_t>(n_), State::AtLower);
    position_.assign(static_cast<std::size_t>(n_), -1);
    for (Index i = 0; i < m_; ++i) {
      state_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = State::Basic;
      position_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
    }
    refactor();
  }

  void refactor() {
    if (m_ == 0) {
      binv_.resize(0, 0);
      xb_.resize(0);
      since_refactor_ = 0;
      return;
    }
    std::vector<Eigen::Triplet<Scalar>> trip;
    for (Index i = 0; i < m_; ++i)
      for (typename Sparse::InnerIterator it(a_, basis_[static_cast<std::size_t>(i)]); it; ++it)
        trip.emplace_back(it.row(), i, it.value());
    Sparse basis_matrix(m_, m_);
    basis_matrix.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(basis_matrix);
    if (lu.info() == Eigen::Success) {
      binv_ = lu.solve(Matrix::Identity(m_, m_));
    } else {
      binv_ = Matrix(basis_matrix).partialPivLu().inverse();
    }
    Vector rhs = b_;
    for (Index j = 0; j < n_; ++j)
      if (state_[static_cast<std::size_t>(j)] == State::AtUpper)
        for (typename Sparse::InnerIterator it(a_, j); it; ++it) rhs[it.row()] -= upper_[j] * it.value();
    xb_ = binv_ * rhs;
    since_refactor_ = 0;
  }

  Vector column(Index j) const {
    Vector w = Vector::Zero(m_);
    for (typename Sparse::InnerIterator it(a_, j); it; ++it) w += binv_.col(it.row()) * it.value();
    return w;
  }

  void pivot(Index r, Index q, const Vector& w) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row = binv_.row(r) / w[r];
    binv_.noalias() -= w * pivot_row;
    binv_.row(r) = pivot_row;
    const Index out = basis_[static_cast<std::size_t>(r)];
    position_[static_cast<std::size_t>(out)] = -1;
    basis_[static_cast<std::size_t>(r)] = q;
    position_[static_cast<std::size_t>(q)] = r;
    state_[static_cast<std::size_t>(q)] = State::Basic;
    if (++since_refactor_ >= opt_.refactor_interval) refactor();
  }

  Outcome iterate(const Vector& cost) {
    int degenerate = 0;
    Vector cb(m_);
    while (true) {
      if (iterations_ >= opt_.max_iterations) return Outcome::IterationLimit;
      for (Index i = 0; i < m_; ++i) cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
      const Vector duals = binv_.transpose() * cb;
      const Vector reduced = cost - a_.transpose() * duals;

      Index q = -1;
      int dir = 0;
      Scalar best(0);
      for (Index j = 0; j < n_; ++j) {
        const auto st = state_[static_cast<std::size_t>(j)];
        if (st == State::Basic || upper_[j] == Scalar(0)) continue;
        Scalar score(0);
        int d = 0;
        if (st == State::AtLower && reduced[j] < -opt_.optimality_tol) {
          score = -reduced[j];
          d = 1;
        } else if (st == State::AtUpper && reduced[j] > opt_.optimality_tol) {
          score = reduced[j];
          d = -1;
        } else {
          continue;
        }
        if (degenerate >= opt_.degenerate_streak) {
          q = j;
          dir = d;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
          dir = d;
        }
      }
      if (q < 0) return Outcome::Optimal;

      const Vector w = column(q);
      Scalar theta = upper_[q];
      Index leave = -1;
      bool leave_to_upper = false;
      for (Index i = 0; i < m_; ++i) {
        if (std::abs(w[i]) <= opt_.pivot_tol) continue;
        const Scalar delta = -Scalar(dir) * w[i];
        const Index col = basis_[static_cast<std::size_t>(i)];
        Scalar limit;
        bool to_upper;
        if (delta < Scalar(0)) {
          limit = std::max(xb_[i], Scalar(0)) / -delta;
          to_upper = false;
        } else {
          if (upper_[col] == kInf) continue;
          limit = std::max(upper_[col] - xb_[i], Scalar(0)) / delta;
          to_upper = true;
        }
        const Scalar tie = Scalar(1e-12) * (Scalar(1) + std::abs(limit));
        const bool better = limit < theta - tie ||
                            (leave >= 0 && std::abs(limit - theta) <= tie &&
                             col < basis_[static_cast<std::size_t>(leave)]);
        if (better) {
          theta = limit;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (theta == kInf) return Outcome::Unbounded;

      ++iterations_;
      xb_ -= (Scalar(dir) * theta) * w;
      if (leave < 0) {
        // Bound flip: the entering column crosses to its other bound.
        state_[static_cast<std::size_t>(q)] =
            dir > 0 ? State::AtUpper : State::AtLower;
      } else {
        const Index out = basis_[static_cast<std::size_t>(leave)];
        const Scalar entering_value = dir > 0 ? theta : upper_[q] - theta;
        state_[static_cast<std::size_t>(out)] = leave_to_upper ? State::AtUpper : State::AtLower;
        pivot(leave, q, w);
        if (since_refactor_ != 0) xb_[leave] = entering_value;
      }
      degenerate = theta <= opt_.feasibility_tol ? degenerate + 1 : 0;
    }
  }

  // Pivot basic artificials out on any usable structural or slack column. Rows
  // where none exists are linearly dependent; their artificial stays basic,
  // pinned at zero by its bound.
  void drive_out_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < first_artificial_) continue;
      const Vector rho = binv_.row(r).transpose();
      Index best_col = -1;
      Scalar best(1e-7);
      for (Index j = 0; j < first_artificial_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == State::Basic) continue;
        Scalar alpha(0);
        for (typename Sparse::InnerIterator it(a_, j); it; ++it) alpha += rho[it.row()] * it.value();
        if (std::abs(alpha) > best) {
          best = std::abs(alpha);
          best_col = j;
        }
      }
      if (best_col < 0) continue;
      const Vector w = column(best_col);
      const Index out = basis_[static_cast<std::size_t>(r)];
      const Scalar step = xb_[r] / w[r];
      const Scalar base =
          state_[static_cast<std::size_t>(best_col)] == State::AtUpper ? upper_[best_col] : Scalar(0);
      xb_ -= step * w;
      state_[static_cast<std::size_t>(out)] = State::AtLower;
      pivot(r, best_col, w);
      if (since_refactor_ != 0) xb_[r] = base + step;
    }
    refactor();
  }

  Solution<Scalar> finish(Status status) {
    Solution<Scalar> out;
    out.status = status;
    out.iterations = iterations_;
    Vector y = Vector::Zero(n_);
    for (Index j = 0; j < n_; ++j)
      if (state_[static_cast<std::size_t>(j)] == State::AtUpper) y[j] = upper_[j];
    for (Index i = 0; i < m_; ++i) y[basis_[static_cast<std::size_t>(i)]] = xb_[i];
    const Index nv = model_.num_vars();
    out.x.resize(nv);
    for (Index j = 0; j < nv; ++j) {
      const auto& mp = map_[static_cast<std::size_t>(j)];
      Scalar v = mp.shift + mp.sign * y[mp.col];
      if (mp.col2 >= 0) v -= y[mp.col2];
      out.x[j] = v;
    }
    out.objective_value = model_.objective().dot(out.x);
    out.max_violation = model_.max_violation(out.x);
    return out;
  }

  const Model<Scalar>& model_;
  SimplexOptions<Scalar> opt_;

  Sparse a_;
  Vector b_;
  Vector upper_;
  Vector cost_;
  Index m_ = 0;
  Index n_ = 0;
  Index first_artificial_ = 0;
  std::vector<ColumnMap> map_;
  std::vector<std::pair<Index, Index>> slack_of_row_;
  std::vector<Index> initial_basis_;

  std::vector<Index> basis_;
  std::vector<State> state_;
  std::vector<Index> position_;
  Matrix binv_;
  Vector xb_;
  long iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace detail

/// Solves `model` to optimality with the bundled simplex. Throws ModelInvalid
/// for malformed models; infeasibility, unboundedness and the iteration limit
/// are reported through the returned status.
template <typename Scalar>
Solution<Scalar> solve_simplex(const Model<Scalar>& model, const SimplexOptions<Scalar>& options = {}) {
  model.validate();
  detail::BoundedSimplex<Scalar> solver(model, options);
  return solver.run();
}

template <typename Scalar>
Solution<Scalar> solve_simplex(const Model<Scalar>& model, Scalar tol, long max_iterations) {
  SimplexOptions<Scalar> options;
  options.feasibility_tol = tol;
  options.optimality_tol = tol;
  options.max_iterations = max_iterations;
  return solve_simplex(model, options);
}

}  // namespace iamod::lp
