#include "hypflow/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hypflow::lp {
namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  // rows x (cols + 1); the last column is the right-hand side.
  Tableau(Eigen::MatrixXd body, std::vector<int> basis)
      : t_(std::move(body)), basis_(std::move(basis)) {}

  int rows() const { return static_cast<int>(t_.rows()); }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double rhs(int r) const { return t_(r, cols()); }
  double at(int r, int c) const { return t_(r, c); }
  const std::vector<int>& basis() const { return basis_; }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int r = 0; r < rows(); ++r)
      if (r != row && t_(r, col) != 0) t_.row(r) -= t_(r, col) * t_.row(row);
    basis_[row] = col;
    ++pivots_;
  }

  void drop_row(int row) {
    Eigen::MatrixXd next(t_.rows() - 1, t_.cols());
    for (int r = 0, k = 0; r < rows(); ++r)
      if (r != row) next.row(k++) = t_.row(r);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + row);
  }

  // Maximizes cost.x over the columns flagged in allowed. Returns false when
  // the objective is unbounded.
  bool optimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed) {
    while (true) {
      // Reduced costs r_j = c_j - c_B . column_j.
      int entering = -1;
      for (int j = 0; j < cols(); ++j) {
        if (!allowed[j]) continue;
        double reduced = cost[j];
        for (int r = 0; r < rows(); ++r) reduced -= cost[basis_[r]] * t_(r, j);
        if (reduced > kEps) {
          entering = j;  // Bland: lowest index
          break;
        }
      }
      if (entering < 0) return true;
      int leaving = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        if (t_(r, entering) <= kEps) continue;
        double ratio = rhs(r) / t_(r, entering);
        if (ratio < best - kEps || (std::abs(ratio - best) <= kEps && basis_[r] < basis_[leaving])) {
          best = ratio;
          leaving = r;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }

  int pivots() const { return pivots_; }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  int pivots_ = 0;
};

}  // namespace

Solution solve(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.c.size());
  const int m_eq = static_cast<int>(lp.A_eq.rows());
  const int m_le = static_cast<int>(lp.A_le.rows());
  if ((m_eq && lp.A_eq.cols() != n) || (m_le && lp.A_le.cols() != n) || lp.b_eq.size() != m_eq ||
      lp.b_le.size() != m_le)
    throw std::invalid_argument("lp::solve: inconsistent dimensions");

  // Columns: original variables, one slack per <= row, one artificial per row.
  const int m = m_eq + m_le;
  const int slack0 = n, art0 = n + m_le, total = n + m_le + m;
  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(m, total + 1);
  for (int r = 0; r < m_eq; ++r) {
    body.row(r).head(n) = lp.A_eq.row(r);
    body(r, total) = lp.b_eq[r];
  }
  for (int r = 0; r < m_le; ++r) {
    body.row(m_eq + r).head(n) = lp.A_le.row(r);
    body(m_eq + r, slack0 + r) = 1;
    body(m_eq + r, total) = lp.b_le[r];
  }
  for (int r = 0; r < m; ++r) {
    if (body(r, total) < 0) body.row(r) *= -1;
    body(r, art0 + r) = 1;
  }
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) basis[r] = art0 + r;
  Tableau tab(std::move(body), std::move(basis));

  // Phase 1: maximize -sum(artificials).
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
  phase1.tail(m).setConstant(-1);
  tab.optimize(phase1, std::vector<bool>(total, true));
  double infeasibility = 0;
  for (int r = 0; r < tab.rows(); ++r)
    if (tab.basis()[r] >= art0) infeasibility += tab.rhs(r);
  Solution sol;
  if (infeasibility > 1e-9) {
    sol.status = Status::infeasible;
    sol.pivots = tab.pivots();
    return sol;
  }

  // Drive remaining (zero-level) artificials out of the basis; rows where
  // that is impossible are redundant.
  for (int r = 0; r < tab.rows();) {
    if (tab.basis()[r] < art0) {
      ++r;
      continue;
    }
    int col = -1;
    for (int j = 0; j < art0; ++j)
      if (std::abs(tab.at(r, j)) > 1e-9) {
        col = j;
        break;
      }
    if (col >= 0) {
      tab.pivot(r, col);
      ++r;
    } else {
      tab.drop_row(r);
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  phase2.head(n) = lp.c;
  std::vector<bool> allowed(total, true);
  for (int j = art0; j < total; ++j) allowed[j] = false;
  bool bounded = tab.optimize(phase2, allowed);
  sol.pivots = tab.pivots();
  if (!bounded) {
    sol.status = Status::unbounded;
    return sol;
  }
  sol.status = Status::optimal;
  sol.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < tab.rows(); ++r)
    if (tab.basis()[r] < n) sol.x[tab.basis()[r]] = tab.rhs(r);
  sol.objective = lp.c.dot(sol.x);
  return sol;
}

}  // namespace hypflow::lp
