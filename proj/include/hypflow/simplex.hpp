#pragma once

#include <Eigen/Core>

namespace hypflow::lp {

// maximize c.x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0.
struct LinearProgram {
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_le;
  Eigen::VectorXd b_le;
  Eigen::VectorXd c;
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = 0;
  int pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule, so it terminates on
// degenerate problems and is deterministic pivot for pivot.
Solution solve(const LinearProgram& lp);

}  // namespace hypflow::lp
