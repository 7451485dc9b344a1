#pragma once

#include <Eigen/Core>

#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow {

// Edge lengths indexed by edge class. The triangulation must outlive the
// metric.
class ConeMetric {
 public:
  ConeMetric(const Triangulation& tri, Eigen::VectorXd lengths);

  const Triangulation& triangulation() const { return *tri_; }
  const Eigen::VectorXd& lengths() const { return x_; }
  int size() const { return static_cast<int>(x_.size()); }

  // The six lengths seen by one tetrahedron, in its local edge order.
  tetgeom::Vec6 tet_lengths(int tet) const;

 private:
  const Triangulation* tri_;
  Eigen::VectorXd x_;
};

struct CurvatureState {
  Eigen::VectorXd K;  // 2 pi - S
  Eigen::VectorXd S;  // dihedral angle sum per edge class
  Eigen::MatrixXd J;  // dK/dx
  double H = 0;       // energy, relative to an x-independent constant
  Eigen::VectorXd H_grad;
};

// Worst admissibility margins over all tetrahedra.
struct MetricMargin {
  bool admissible = false;
  double cosine_margin = 0;
  double vertex_slack = 0;
  int tet = -1;  // tetrahedron attaining the smaller margin
  int vertex = -1;
  int edge = -1;
  std::string reason;
};

MetricMargin metric_margin(const ConeMetric& m);
bool is_admissible(const ConeMetric& m);

// Per-tetrahedron dihedral angles in local edge order; throws
// InadmissibleError carrying the tetrahedron index.
std::vector<tetgeom::Vec6> tet_angles(const ConeMetric& m);

// K and S only.
CurvatureState curvature(const ConeMetric& m);
Eigen::MatrixXd curvature_jacobian(const ConeMetric& m);

struct Energy {
  double value = 0;
  Eigen::VectorXd grad;
};

Energy energy(const ConeMetric& m);

// Everything above in one pass.
CurvatureState evaluate(const ConeMetric& m);

}  // namespace hypflow
