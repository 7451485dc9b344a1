#pragma once

// Geometry of a single hyperideal tetrahedron.
//
// Conventions follow triangulation.hpp: edge e joins kEdgeVertices[e], face
// f is opposite vertex f. The truncation arc at vertex v in face f (v != f)
// is the side of the truncation triangle at v lying in face f; it is the
// side of the right-angled hexagon f opposite the edge of f not meeting v.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hypflow/random.hpp"

namespace hypflow::tetgeom {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Fixed numerical contract of this module.
inline constexpr double kSymmetryTol = 1e-8;
inline constexpr double kOracleTol = 1e-9;
inline constexpr double kQuadratureTol = 1e-10;
inline constexpr double kNewtonTol = 1e-12;
// Floor; the check widens with eps * cosh(longest edge) for long edges.
inline constexpr double kEndpointTol = 1e-8;
inline constexpr double kCosineGuard = 1e-9;
inline constexpr int kNewtonMaxIterations = 200;

class Arcs {
 public:
  double operator()(int vertex, int face) const { return values_[4 * vertex + face]; }
  double& operator()(int vertex, int face) { return values_[4 * vertex + face]; }
  // The twelve arcs ordered by (vertex, face).
  std::array<double, 12> flat() const;

 private:
  std::array<double, 16> values_{};
};

Arcs arcs_from_lengths(const Vec6& x);

// Outcome of the lengths -> angles pipeline without throwing.
struct AngleEvaluation {
  bool admissible = false;
  Vec6 angles = Vec6::Zero();  // mean of the two endpoint computations
  double cosine_margin = 0;    // min over the 12 corners of 1 - |quotient|
  double vertex_slack = 0;     // min over vertices of pi - angle sum
  double endpoint_gap = 0;     // max disagreement between endpoint angles
  int vertex = -1;             // offending vertex when inadmissible
  int edge = -1;               // offending edge when inadmissible
  std::string reason;
};

AngleEvaluation evaluate_angles(const Vec6& x);

// Throws InadmissibleError naming the offending vertex/edge.
Vec6 angles_from_lengths(const Vec6& x);

// Open polytope: every angle in (0, pi), each vertex triple sums below pi.
bool angles_admissible(const Vec6& a);
// Distance to the polytope boundary in the sense of the defining
// inequalities (negative outside).
double angle_slack(const Vec6& a);

// Inverse of angles_from_lengths by damped Newton from the all-ones guess.
Vec6 lengths_from_angles(const Vec6& a);
Vec6 lengths_from_angles(const Vec6& a, const Vec6& initial_guess);

// [d a_i / d x_j], analytic. Symmetric positive definite.
Mat6 jacobian_a_wrt_x(const Vec6& x);
// [d x_i / d a_j] = inverse of the above.
Mat6 jacobian_x_wrt_a(const Vec6& x);

// Angles of the tetrahedron with all lengths 1; base point of the potential.
const Vec6& reference_angles();

// Volume up to an additive constant, zero at the all-ones tetrahedron.
double schlafli_potential(const Vec6& x);
double schlafli_potential_at_angles(const Vec6& a);
// V(a_to) - V(a_from) along the segment joining them. Both ends must be
// admissible angle vectors.
double schlafli_increment(const Vec6& a_from, const Vec6& a_to);
// The same volume change computed along the straight segment in length
// space, -1/2 int x^T (da/dx) dx. Falls back to the angle-space segment
// when the length segment leaves the admissible set.
double schlafli_increment_lengths(const Vec6& x_from, const Vec6& x_to);

struct OracleResult {
  bool admissible = false;
  int positive = 0;  // eigenvalue signs of the Gram matrix
  int negative = 0;
  Vec6 angles = Vec6::Zero();
};

// Independent check: builds the Gram matrix of the polar vectors in
// Minkowski space, embeds them and reads dihedral angles from face normals.
OracleResult minkowski_oracle(const Vec6& x);

struct TetShape {
  Vec6 lengths;
  Arcs arcs;
  Vec6 angles;
  Mat6 jac_ax;
  Mat6 jac_xa;
};

TetShape shape(const Vec6& x);

struct ConvexityWitness {
  Vec6 first;
  Vec6 second;
  Vec6 midpoint;
  std::string reason;
};

struct ConvexityReport {
  std::uint64_t seed = 0;
  int trials = 0;
  int witnesses_found = 0;
  std::vector<ConvexityWitness> witnesses;
};

// Samples admissible pairs (log-uniform lengths in [0.02, 5]) and records
// pairs whose midpoint is inadmissible.
ConvexityReport probe_length_space_convexity(int trials, std::uint64_t seed);

// Draws an admissible length vector by rejection from the same law.
Vec6 random_admissible_lengths(Rng& rng, double lo = 0.02, double hi = 5.0);

}  // namespace hypflow::tetgeom
