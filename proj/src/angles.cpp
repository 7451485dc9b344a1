#include "hypflow/angles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hypflow/errors.hpp"
#include "hypflow/simplex.hpp"

namespace hypflow {

using tetgeom::Vec6;

namespace {

constexpr double kPi = std::numbers::pi;

double vertex_sum(const Vec6& a, int v) {
  double s = 0;
  for (int e : edges_at_vertex(v)) s += a[e];
  return s;
}

void require_shape(const Triangulation& tri, const AngleAssignment& assign) {
  if (static_cast<int>(assign.angles.size()) != tri.tet_count())
    throw std::invalid_argument(fmt::format("angle assignment has {} tetrahedra, triangulation has {}",
                                            assign.angles.size(), tri.tet_count()));
}

// Subtracts the mean over each edge class; the result is tangent to the
// edge-sum equalities (orthogonal projection onto their null space).
std::vector<Vec6> project_tangent(const Triangulation& tri, const std::vector<Vec6>& g) {
  std::vector<double> mean(tri.edge_count(), 0.0);
  for (const EdgeClass& ec : tri.edge_classes()) {
    double sum = 0;
    for (const Corner& c : ec.corners) sum += g[c.tet][c.edge];
    mean[ec.id] = sum / ec.valence();
  }
  std::vector<Vec6> out = g;
  for (int t = 0; t < tri.tet_count(); ++t)
    for (int e = 0; e < 6; ++e) out[t][e] -= mean[tri.edge_class_of(t, e)];
  return out;
}

double inf_norm(const std::vector<Vec6>& v) {
  double m = 0;
  for (const Vec6& a : v) m = std::max(m, a.lpNorm<Eigen::Infinity>());
  return m;
}

double dot(const std::vector<Vec6>& a, const std::vector<Vec6>& b) {
  double s = 0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t].dot(b[t]);
  return s;
}

std::vector<Vec6> axpy(const std::vector<Vec6>& x, double alpha, const std::vector<Vec6>& d) {
  std::vector<Vec6> out = x;
  for (std::size_t t = 0; t < x.size(); ++t) out[t] += alpha * d[t];
  return out;
}

bool strictly_feasible(const std::vector<Vec6>& angles) {
  return std::all_of(angles.begin(), angles.end(), [](const Vec6& a) { return tetgeom::angles_admissible(a); });
}

double volume_increment(const std::vector<Vec6>& from, const std::vector<Vec6>& to) {
  double dv = 0;
  for (std::size_t t = 0; t < from.size(); ++t) dv += tetgeom::schlafli_increment(from[t], to[t]);
  return dv;
}

}  // namespace

AssignmentCheck check_assignment(const Triangulation& tri, const AngleAssignment& assign) {
  require_shape(tri, assign);
  AssignmentCheck out;
  out.min_vertex_slack = std::numeric_limits<double>::infinity();
  out.min_angle = std::numeric_limits<double>::infinity();
  for (const EdgeClass& ec : tri.edge_classes()) {
    double sum = 0;
    for (const Corner& c : ec.corners) sum += assign.angles[c.tet][c.edge];
    out.max_edge_residual = std::max(out.max_edge_residual, std::abs(sum - 2 * kPi));
  }
  for (const Vec6& a : assign.angles) {
    out.min_angle = std::min(out.min_angle, a.minCoeff());
    for (int v = 0; v < 4; ++v) out.min_vertex_slack = std::min(out.min_vertex_slack, kPi - vertex_sum(a, v));
  }
  return out;
}

AngleAssignment uniform_assignment(const Triangulation& tri) {
  AngleAssignment out;
  out.angles.assign(tri.tet_count(), Vec6::Zero());
  for (int t = 0; t < tri.tet_count(); ++t)
    for (int e = 0; e < 6; ++e)
      out.angles[t][e] = 2 * kPi / tri.edge_classes()[tri.edge_class_of(t, e)].valence();
  return out;
}

LPResult lp_feasibility(const Triangulation& tri) {
  const int corners = 6 * tri.tet_count();
  const int eps_plus = corners, eps_minus = corners + 1, n = corners + 2;
  lp::LinearProgram prog;
  prog.c = Eigen::VectorXd::Zero(n);
  prog.c[eps_plus] = 1;
  prog.c[eps_minus] = -1;

  prog.A_eq = Eigen::MatrixXd::Zero(tri.edge_count(), n);
  prog.b_eq = Eigen::VectorXd::Constant(tri.edge_count(), 2 * kPi);
  for (const EdgeClass& ec : tri.edge_classes())
    for (const Corner& c : ec.corners) prog.A_eq(ec.id, 6 * c.tet + c.edge) = 1;

  const int vertex_rows = 4 * tri.tet_count();
  prog.A_le = Eigen::MatrixXd::Zero(vertex_rows + corners, n);
  prog.b_le = Eigen::VectorXd::Zero(vertex_rows + corners);
  for (int t = 0; t < tri.tet_count(); ++t)
    for (int v = 0; v < 4; ++v) {
      int row = 4 * t + v;
      for (int e : edges_at_vertex(v)) prog.A_le(row, 6 * t + e) = 1;
      prog.A_le(row, eps_plus) = 1;
      prog.A_le(row, eps_minus) = -1;
      prog.b_le[row] = kPi;
    }
  for (int c = 0; c < corners; ++c) {
    int row = vertex_rows + c;
    prog.A_le(row, c) = -1;
    prog.A_le(row, eps_plus) = 1;
    prog.A_le(row, eps_minus) = -1;
  }

  lp::Solution sol = lp::solve(prog);
  LPResult out;
  out.pivots = sol.pivots;
  if (sol.status != lp::Status::optimal) return out;
  out.epsilon = sol.objective;
  out.feasible = out.epsilon > 1e-12;
  out.witness.angles.assign(tri.tet_count(), Vec6::Zero());
  for (int t = 0; t < tri.tet_count(); ++t) out.witness.angles[t] = sol.x.segment<6>(6 * t);
  return out;
}

Realization realize_structure(const Triangulation& tri, const AngleAssignment& assign) {
  AssignmentCheck check = check_assignment(tri, assign);
  if (!check.valid(1e-9))
    throw InadmissibleError(fmt::format(
        "angle assignment violates the structure conditions (edge residual {:.3g}, vertex slack {:.3g}, min angle {:.3g})",
        check.max_edge_residual, check.min_vertex_slack, check.min_angle));
  Realization out;
  for (int t = 0; t < tri.tet_count(); ++t) {
    if (!tetgeom::angles_admissible(assign.angles[t]))
      throw InadmissibleError(fmt::format("tetrahedron {} has inadmissible angles", t), t);
    out.lengths.push_back(tetgeom::lengths_from_angles(assign.angles[t]));
  }
  out.spread = Eigen::VectorXd::Zero(tri.edge_count());
  out.mean_lengths = Eigen::VectorXd::Zero(tri.edge_count());
  for (const EdgeClass& ec : tri.edge_classes()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
    for (const Corner& c : ec.corners) {
      double x = out.lengths[c.tet][c.edge];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      sum += x;
    }
    out.spread[ec.id] = hi - lo;
    out.mean_lengths[ec.id] = sum / ec.valence();
  }
  out.max_spread = out.spread.size() ? out.spread.maxCoeff() : 0.0;
  return out;
}

double total_volume(const AngleAssignment& assign) {
  double v = 0;
  for (const Vec6& a : assign.angles) v += tetgeom::schlafli_potential_at_angles(a);
  return v;
}

VolumeResult maximize_volume(const Triangulation& tri, const AngleAssignment& start, double tol,
                             int max_iterations) {
  AssignmentCheck check = check_assignment(tri, start);
  if (!check.valid(1e-9))
    throw InadmissibleError("maximize_volume: start is not a strictly feasible linear hyperbolic structure");

  std::vector<Vec6> a = start.angles;
  // Lengths are kept between iterations as Newton warm starts.
  std::vector<Vec6> lengths(a.size(), Vec6::Ones());
  auto gradient = [&](const std::vector<Vec6>& angles) {
    std::vector<Vec6> g(angles.size());
    for (std::size_t t = 0; t < angles.size(); ++t) {
      lengths[t] = tetgeom::lengths_from_angles(angles[t], lengths[t]);
      g[t] = -0.5 * lengths[t];
    }
    return project_tangent(tri, g);
  };

  VolumeReport report;
  double objective = total_volume(start);
  report.objective_history.push_back(objective);
  std::vector<Vec6> g = gradient(a);
  std::vector<Vec6> prev_a, prev_g;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0;; ++iter) {
    report.iterations = iter;
    report.projected_gradient = inf_norm(g);
    if (report.projected_gradient < tol) {
      report.converged = true;
      break;
    }
    if (iter >= max_iterations)
      throw SolverError(fmt::format("maximize_volume: no convergence after {} iterations (gradient {:.3g})",
                                    max_iterations, report.projected_gradient));

    // Barzilai-Borwein step as the first trial, then backtracking.
    double alpha = 1.0;
    if (!prev_a.empty()) {
      std::vector<Vec6> s(a.size()), y(a.size());
      for (std::size_t t = 0; t < a.size(); ++t) {
        s[t] = a[t] - prev_a[t];
        y[t] = g[t] - prev_g[t];
      }
      double sy = dot(s, y);
      if (sy < 0) alpha = dot(s, s) / -sy;
    }
    const double g2 = dot(g, g);
    bool accepted = false;
    for (int halving = 0; halving < 80; ++halving, alpha *= 0.5) {
      std::vector<Vec6> trial = axpy(a, alpha, g);
      if (!strictly_feasible(trial)) continue;
      double dv = volume_increment(a, trial);
      if (dv >= kArmijo * alpha * g2) {
        prev_a = std::move(a);
        prev_g = std::move(g);
        a = std::move(trial);
        objective += dv;
        report.objective_history.push_back(objective);
        g = gradient(a);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw SolverError(fmt::format("maximize_volume: line search failed at iteration {} (gradient {:.3g})",
                                    iter, report.projected_gradient));
  }

  VolumeResult out;
  out.angles.angles = a;
  report.volume = objective;
  report.realization = realize_structure(tri, out.angles);
  out.report = std::move(report);
  return out;
}

AngleAssignment random_structure(const Triangulation& tri, const AngleAssignment& base, Rng& rng,
                                 double scale) {
  std::vector<Vec6> dir(base.angles.size());
  for (Vec6& d : dir)
    for (int e = 0; e < 6; ++e) d[e] = rng.uniform(-1, 1);
  dir = project_tangent(tri, dir);
  double norm = inf_norm(dir);
  if (norm == 0) return base;
  double alpha = scale * rng.uniform() / norm;
  for (int k = 0; k < 200; ++k, alpha *= 0.5) {
    std::vector<Vec6> trial = axpy(base.angles, alpha, dir);
    if (strictly_feasible(trial)) return {trial};
  }
  return base;
}

ConcavityReport concavity_probe(const Triangulation& tri, const AngleAssignment& base, int probes,
                                std::uint64_t seed, double tol) {
  ConcavityReport report;
  report.seed = seed;
  report.probes = std::max(probes, 0);
  report.max_second_difference = -std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int i = 0; i < report.probes; ++i) {
    AngleAssignment p = random_structure(tri, base, rng, 0.3);
    AngleAssignment q = random_structure(tri, base, rng, 0.3);
    std::vector<Vec6> span = axpy(q.angles, -1.0, p.angles);
    std::vector<Vec6> mid = axpy(p.angles, 0.5, span);
    // Second difference with spacing |q - p| / 4 around the midpoint.
    std::vector<Vec6> lo = axpy(mid, -0.25, span), hi = axpy(mid, 0.25, span);
    double d2 = volume_increment(mid, hi) - volume_increment(lo, mid);
    report.max_second_difference = std::max(report.max_second_difference, d2);
    if (d2 > tol) ++report.violations;
  }
  if (report.probes == 0) report.max_second_difference = 0;
  return report;
}

}  // namespace hypflow
