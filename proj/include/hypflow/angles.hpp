#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hypflow/random.hpp"
#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow {

// One dihedral angle per corner: angles[t][e] for tetrahedron t, local edge e.
struct AngleAssignment {
  std::vector<tetgeom::Vec6> angles;
};

struct AssignmentCheck {
  double max_edge_residual = 0;  // max |sum around edge class - 2 pi|
  double min_vertex_slack = 0;   // min over (tet, vertex) of pi - triple sum
  double min_angle = 0;
  // Conditions (1) and (2) with all angles positive, to tolerance on (1).
  bool valid(double edge_tol = 1e-12) const {
    return max_edge_residual <= edge_tol && min_vertex_slack > 0 && min_angle > 0;
  }
};

AssignmentCheck check_assignment(const Triangulation& tri, const AngleAssignment& assign);

// Each corner gets 2 pi / valence of its edge class.
AngleAssignment uniform_assignment(const Triangulation& tri);

struct LPResult {
  bool feasible = false;
  double epsilon = 0;  // optimal slack
  AngleAssignment witness;
  int pivots = 0;
};

// maximize eps subject to: edge sums = 2 pi, vertex triples <= pi - eps,
// angles >= eps. Feasible (strictly) iff the optimum is positive.
LPResult lp_feasibility(const Triangulation& tri);

struct Realization {
  std::vector<tetgeom::Vec6> lengths;  // per tetrahedron, local edge order
  Eigen::VectorXd spread;              // per edge class: max - min corner length
  Eigen::VectorXd mean_lengths;        // per edge class
  double max_spread = 0;
};

// Realizes every tetrahedron separately from its angles. Throws
// InadmissibleError when the assignment violates the conditions.
Realization realize_structure(const Triangulation& tri, const AngleAssignment& assign);

struct VolumeReport {
  bool converged = false;
  int iterations = 0;
  double volume = 0;  // sum of relative volumes at the returned point
  double projected_gradient = 0;
  std::vector<double> objective_history;
  Realization realization;
};

struct VolumeResult {
  AngleAssignment angles;
  VolumeReport report;
};

// Projected gradient ascent of the total (relative) volume over the space
// of linear hyperbolic structures, with the Schlafli gradient
// dV/da = -x/2 and a backtracking line search that keeps every vertex
// triple strictly below pi.
VolumeResult maximize_volume(const Triangulation& tri, const AngleAssignment& start, double tol,
                             int max_iterations = 20000);

// Total relative volume.
double total_volume(const AngleAssignment& assign);

// Random strictly feasible point: start plus a random direction tangent to
// the edge equalities, scaled by up to `scale` and shrunk until feasible.
AngleAssignment random_structure(const Triangulation& tri, const AngleAssignment& base, Rng& rng,
                                 double scale);

struct ConcavityReport {
  std::uint64_t seed = 0;
  int probes = 0;
  int violations = 0;
  double max_second_difference = 0;  // largest observed (should be < 0)
};

// Second differences of the total volume along random segments inside the
// space of linear hyperbolic structures.
ConcavityReport concavity_probe(const Triangulation& tri, const AngleAssignment& base, int probes,
                                std::uint64_t seed, double tol = 1e-8);

}  // namespace hypflow
