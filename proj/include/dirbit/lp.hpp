#pragma once

// Dense two-phase simplex for small linear programs in standard form
//
//     minimize c^T x   subject to   A x = b,  x >= 0.
//
// Pricing is Dantzig's rule; after a run of degenerate pivots it switches to
// Bland's rule, which cannot cycle.

#include "dirbit/common.hpp"

#include <limits>
#include <vector>

namespace dirbit {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_trouble };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::numerical_trouble: return "numerical_trouble";
  }
  return "unknown";
}

struct LpOptions {
  double pivot_tol = 1e-9;
  double feasibility_tol = 1e-9;
  int max_iterations = 200000;
  int degenerate_switch = 50;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(const Mat& a, const Vec& b, const LpOptions& opt)
      : m_(static_cast<int>(a.rows())), n_(static_cast<int>(a.cols())), opt_(opt) {
    t_ = Mat::Zero(m_ + 1, n_ + m_ + 1);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[i] = n_ + i;
    }
    allowed_.assign(n_ + m_, true);
  }

  int rhs() const { return n_ + m_; }

  // Phase one: minimize the sum of artificials.
  LpStatus phase_one(int& iterations) {
    t_.row(m_).setZero();
    for (int i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    return iterate(iterations);
  }

  double phase_one_objective() const { return -t_(m_, rhs()); }

  // Pivot artificials out of the basis; rows that cannot be rescued are redundant.
  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int col = -1;
      double best = opt_.pivot_tol;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      }
      if (col >= 0) pivot(i, col);
    }
    for (int j = n_; j < n_ + m_; ++j) allowed_[j] = false;
  }

  LpStatus phase_two(const Vec& c, int& iterations) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (int i = 0; i < m_; ++i) {
      const int bj = basis_[i];
      const double cb = bj < n_ ? c(bj) : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    return iterate(iterations);
  }

  Vec solution() const {
    Vec x = Vec::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x(basis_[i]) = t_(i, rhs());
    return x;
  }

 private:
  LpStatus iterate(int& iterations) {
    int degenerate_run = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
      const bool bland = degenerate_run >= opt_.degenerate_switch;
      int enter = -1;
      double most_negative = -opt_.feasibility_tol;
      for (int j = 0; j < n_ + m_; ++j) {
        if (!allowed_[j]) continue;
        const double r = t_(m_, j);
        if (bland) {
          if (r < -opt_.feasibility_tol) {
            enter = j;
            break;
          }
        } else if (r < most_negative) {
          most_negative = r;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      // Ratio test. Among near-ties, Bland mode takes the lowest basis index;
      // otherwise the largest pivot, which keeps the tableau well conditioned.
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double coef = t_(i, enter);
        if (coef > opt_.pivot_tol) best_ratio = std::min(best_ratio, std::max(0.0, t_(i, rhs())) / coef);
      }
      if (best_ratio == std::numeric_limits<double>::infinity()) return LpStatus::unbounded;
      int leave = -1;
      const double window = best_ratio + 1e-12 * std::max(1.0, best_ratio);
      for (int i = 0; i < m_; ++i) {
        const double coef = t_(i, enter);
        if (coef <= opt_.pivot_tol || std::max(0.0, t_(i, rhs())) / coef > window) continue;
        if (leave < 0) {
          leave = i;
        } else if (bland ? basis_[i] < basis_[leave] : coef > t_(leave, enter)) {
          leave = i;
        }
      }
      degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  int m_;
  int n_;
  LpOptions opt_;
  Mat t_;
  std::vector<int> basis_;
  std::vector<bool> allowed_;
};

}  // namespace detail

inline LpResult solve_lp(const Vec& c, const Mat& a, const Vec& b, const LpOptions& opt = {}) {
  require(a.rows() == b.size() && a.cols() == c.size(), "solve_lp: dimension mismatch");
  LpResult result;
  detail::Tableau tableau(a, b, opt);
  const double scale = std::max(1.0, b.cwiseAbs().sum());
  LpStatus s = tableau.phase_one(result.iterations);
  if (s == LpStatus::iteration_limit) {
    result.status = s;
    return result;
  }
  if (tableau.phase_one_objective() > opt.feasibility_tol * scale) {
    result.status = LpStatus::infeasible;
    return result;
  }
  tableau.expel_artificials();
  s = tableau.phase_two(c, result.iterations);
  result.status = s;
  if (s == LpStatus::optimal) {
    result.x = tableau.solution().cwiseMax(0.0);
    result.objective = c.dot(result.x);
    const double residual = (a * result.x - b).cwiseAbs().maxCoeff();
    if (residual > 1e-7 * scale) result.status = LpStatus::numerical_trouble;
  }
  return result;
}

/// Feasibility only: is there x >= 0 with A x = b?
inline LpResult find_feasible(const Mat& a, const Vec& b, const LpOptions& opt = {}) {
  return solve_lp(Vec::Zero(a.cols()), a, b, opt);
}

}  // namespace dirbit
