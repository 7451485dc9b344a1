#include "hypflow/tetgeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "hypflow/errors.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow::tetgeom {
namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(const Vec6& x) {
  for (int i = 0; i < 6; ++i)
    if (!(x[i] > 0) || !std::isfinite(x[i]))
      throw InadmissibleError(fmt::format("length {} is not a positive finite number ({})", i, x[i]));
}

// The two vertices of face f other than v, in increasing order.
std::array<int, 2> others_in_face(int v, int f) {
  std::array<int, 2> out{};
  int k = 0;
  for (int u = 0; u < 4; ++u)
    if (u != v && u != f) out[k++] = u;
  return out;
}

// Hyperbolic cosine of each arc, straight from the hexagon cosine law.
struct ArcCosh {
  std::array<double, 16> q{};
  double operator()(int v, int f) const { return q[4 * v + f]; }
};

ArcCosh arc_cosh(const Vec6& x) {
  Vec6 c = x.array().cosh(), s = x.array().sinh();
  ArcCosh out;
  for (int f = 0; f < 4; ++f)
    for (int v = 0; v < 4; ++v) {
      if (v == f) continue;
      auto [j, k] = others_in_face(v, f);
      int ij = edge_index(v, j), ik = edge_index(v, k), jk = edge_index(j, k);
      out.q[4 * v + f] = (c[jk] + c[ij] * c[ik]) / (s[ij] * s[ik]);
    }
  return out;
}

// At vertex v, the corner of the truncation triangle along edge vw lies
// between the arcs in the two faces containing vw; the opposite side is the
// arc in face w.
struct CornerFaces {
  int b, c, opposite;
};

CornerFaces corner_faces(int v, int w) {
  auto [b, c] = others_in_face(v, w);
  return {b, c, w};
}

double corner_cosine(const ArcCosh& q, int v, int w) {
  CornerFaces cf = corner_faces(v, w);
  double qb = q(v, cf.b), qc = q(v, cf.c), qo = q(v, cf.opposite);
  return (qb * qc - qo) / (std::sqrt(qb * qb - 1) * std::sqrt(qc * qc - 1));
}

}  // namespace

std::array<double, 12> Arcs::flat() const {
  std::array<double, 12> out{};
  int k = 0;
  for (int v = 0; v < 4; ++v)
    for (int f = 0; f < 4; ++f)
      if (v != f) out[k++] = values_[4 * v + f];
  return out;
}

Arcs arcs_from_lengths(const Vec6& x) {
  require_positive(x);
  ArcCosh q = arc_cosh(x);
  Arcs out;
  for (int v = 0; v < 4; ++v)
    for (int f = 0; f < 4; ++f)
      if (v != f) out(v, f) = std::acosh(q(v, f));
  return out;
}

AngleEvaluation evaluate_angles(const Vec6& x) {
  require_positive(x);
  ArcCosh q = arc_cosh(x);
  AngleEvaluation ev;
  ev.cosine_margin = 1.0;
  std::array<std::array<double, 2>, 6> ends{};
  for (int e = 0; e < 6; ++e) {
    auto [v, w] = kEdgeVertices[e];
    for (int s = 0; s < 2; ++s) {
      int from = s == 0 ? v : w, to = s == 0 ? w : v;
      double c = corner_cosine(q, from, to);
      double margin = std::isfinite(c) ? 1.0 - std::abs(c) : -1.0;
      if (margin < ev.cosine_margin) {
        ev.cosine_margin = margin;
        if (margin <= kCosineGuard) {
          ev.vertex = from;
          ev.edge = e;
        }
      }
      ends[e][s] = std::acos(std::clamp(std::isfinite(c) ? c : 1.0, -1.0, 1.0));
    }
    ev.angles[e] = 0.5 * (ends[e][0] + ends[e][1]);
    ev.endpoint_gap = std::max(ev.endpoint_gap, std::abs(ends[e][0] - ends[e][1]));
  }
  ev.vertex_slack = kPi;
  int worst_vertex = -1;
  for (int v = 0; v < 4; ++v) {
    double sum = 0;
    for (int e : edges_at_vertex(v)) sum += ev.angles[e];
    if (kPi - sum < ev.vertex_slack) {
      ev.vertex_slack = kPi - sum;
      worst_vertex = v;
    }
  }

  if (ev.cosine_margin <= kCosineGuard) {
    ev.reason = fmt::format("truncation triangle at vertex {} degenerates at edge {} (1 - |cos| = {:.3g})",
                            ev.vertex, ev.edge, ev.cosine_margin);
    return ev;
  }
  double gap_tol = std::max(kEndpointTol, 256 * std::numeric_limits<double>::epsilon() * std::cosh(x.maxCoeff()));
  if (ev.endpoint_gap > gap_tol) {
    ev.reason = fmt::format("endpoint angles disagree by {:.3g}", ev.endpoint_gap);
    return ev;
  }
  if (ev.vertex_slack <= 0) {
    ev.vertex = worst_vertex;
    ev.reason = fmt::format("angle sum at vertex {} is not below pi", worst_vertex);
    return ev;
  }
  ev.admissible = true;
  return ev;
}

Vec6 angles_from_lengths(const Vec6& x) {
  AngleEvaluation ev = evaluate_angles(x);
  if (!ev.admissible) throw InadmissibleError("inadmissible lengths: " + ev.reason);
  return ev.angles;
}

double angle_slack(const Vec6& a) {
  double slack = kPi;
  for (int e = 0; e < 6; ++e) slack = std::min({slack, a[e], kPi - a[e]});
  for (int v = 0; v < 4; ++v) {
    double sum = 0;
    for (int e : edges_at_vertex(v)) sum += a[e];
    slack = std::min(slack, kPi - sum);
  }
  return slack;
}

bool angles_admissible(const Vec6& a) { return a.allFinite() && angle_slack(a) > 0; }

Mat6 jacobian_a_wrt_x(const Vec6& x) {
  AngleEvaluation ev = evaluate_angles(x);
  if (!ev.admissible) throw InadmissibleError("inadmissible lengths: " + ev.reason);
  Vec6 c = x.array().cosh(), s = x.array().sinh();
  ArcCosh q = arc_cosh(x);

  // dq[v][f] = gradient of cosh(arc(v, f)) with respect to the six lengths.
  std::array<Vec6, 16> dq;
  for (int f = 0; f < 4; ++f)
    for (int v = 0; v < 4; ++v) {
      if (v == f) continue;
      auto [j, k] = others_in_face(v, f);
      int ij = edge_index(v, j), ik = edge_index(v, k), jk = edge_index(j, k);
      Vec6 g = Vec6::Zero();
      g[jk] = s[jk] / (s[ij] * s[ik]);
      g[ij] = -(c[ik] + c[jk] * c[ij]) / (s[ij] * s[ij] * s[ik]);
      g[ik] = -(c[ij] + c[jk] * c[ik]) / (s[ik] * s[ik] * s[ij]);
      dq[4 * v + f] = g;
    }

  Mat6 jac = Mat6::Zero();
  for (int e = 0; e < 6; ++e) {
    auto [v, w] = kEdgeVertices[e];
    for (int side = 0; side < 2; ++side) {
      int from = side == 0 ? v : w, to = side == 0 ? w : v;
      CornerFaces cf = corner_faces(from, to);
      double qb = q(from, cf.b), qc = q(from, cf.c), qo = q(from, cf.opposite);
      double sb = std::sqrt(qb * qb - 1), sc = std::sqrt(qc * qc - 1);
      double cosine = (qb * qc - qo) / (sb * sc);
      double sine = std::sqrt(1 - cosine * cosine);
      double d_qb = (qo * qb - qc) / (sb * sb * sb * sc);
      double d_qc = (qo * qc - qb) / (sc * sc * sc * sb);
      double d_qo = -1 / (sb * sc);
      Vec6 grad = d_qb * dq[4 * from + cf.b] + d_qc * dq[4 * from + cf.c] +
                  d_qo * dq[4 * from + cf.opposite];
      jac.row(e) += -0.5 / sine * grad.transpose();
    }
  }
  return jac;
}

Mat6 jacobian_x_wrt_a(const Vec6& x) { return jacobian_a_wrt_x(x).inverse(); }

Vec6 lengths_from_angles(const Vec6& a) { return lengths_from_angles(a, Vec6::Ones()); }

namespace {

// The angles themselves are only accurate to about eps * cosh(max x), so the
// residual target is raised to that level for long edges.
double residual_target(const Vec6& x) {
  return std::max(kNewtonTol, 64 * std::numeric_limits<double>::epsilon() * std::cosh(x.maxCoeff()));
}

// Damped Newton from an admissible x. Returns false when the line search
// stalls before reaching the target.
bool newton_lengths(const Vec6& a, Vec6& x) {
  AngleEvaluation ev = evaluate_angles(x);
  Vec6 residual = ev.angles - a;
  double norm = residual.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < kNewtonMaxIterations && norm >= residual_target(x); ++iter) {
    Vec6 step = jacobian_a_wrt_x(x).partialPivLu().solve(residual);
    double lambda = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, lambda *= 0.5) {
      Vec6 trial = x - lambda * step;
      if ((trial.array() <= 0).any()) continue;
      AngleEvaluation tev = evaluate_angles(trial);
      if (!tev.admissible) continue;
      Vec6 trial_residual = tev.angles - a;
      double trial_norm = trial_residual.lpNorm<Eigen::Infinity>();
      if (trial_norm < norm) {
        x = trial;
        residual = trial_residual;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return norm < residual_target(x);
}

}  // namespace

Vec6 lengths_from_angles(const Vec6& a, const Vec6& initial_guess) {
  if (!angles_admissible(a))
    throw InadmissibleError(fmt::format("inadmissible angles (slack {:.3g})", angle_slack(a)));
  Vec6 x = initial_guess;
  AngleEvaluation ev = evaluate_angles(x);
  if (!ev.admissible) {
    x = Vec6::Ones();
    ev = evaluate_angles(x);
  }
  Vec6 start = x;
  if (newton_lengths(a, x)) return x;

  // Continuation along the segment from the angles of the start point to
  // the target; the angle polytope is convex, so every stage is admissible.
  x = start;
  const Vec6 a0 = ev.angles;
  double s = 0, ds = 0.125;
  while (s < 1) {
    double s_next = std::min(1.0, s + ds);
    Vec6 trial = x;
    if (newton_lengths(a0 + s_next * (a - a0), trial)) {
      x = trial;
      s = s_next;
      ds *= 2;
    } else if ((ds *= 0.5) < 1e-9) {
      break;
    }
  }
  if (s >= 1) return x;
  throw SolverError(fmt::format("lengths_from_angles: Newton continuation stalled at s = {:.6g} (angle slack {:.3g})",
                                s, angle_slack(a)));
}

const Vec6& reference_angles() {
  static const Vec6 ref = angles_from_lengths(Vec6::Ones());
  return ref;
}

namespace {

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  for (int i = 1; i <= n; ++i) {
    double z = std::cos(kPi * (i - 0.25) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes.push_back(z);
    rule.weights.push_back(2 / ((1 - z * z) * dp * dp));
  }
  return rule;
}

const GaussRule& rule15() {
  static const GaussRule rule = gauss_legendre(15);
  return rule;
}

// Integrates s -> sum_i x_i(a0 + s d) d_i over [lo, hi]. The warm start for
// Newton is carried from node to node; it affects iteration counts only.
struct SegmentIntegrand {
  Vec6 a0, d;
  Vec6 guess = Vec6::Ones();
  double operator()(double s) {
    guess = lengths_from_angles(a0 + s * d, guess);
    return guess.dot(d);
  }
};

// s -> a(x0 + s d) . d; bounded even where the angle map is not differentiable.
struct LengthSegmentIntegrand {
  Vec6 x0, d;
  double operator()(double s) { return angles_from_lengths(x0 + s * d).dot(d); }
};

template <class F>
double gauss_panel(F& f, double lo, double hi) {
  const GaussRule& r = rule15();
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo), sum = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
  return half * sum;
}

// `noise` bounds the absolute error of a single integrand value.
template <class F>
double adaptive(F& f, double lo, double hi, double whole, double tol, int depth, double noise = 0) {
  double mid = 0.5 * (lo + hi);
  double left = gauss_panel(f, lo, mid), right = gauss_panel(f, mid, hi);
  // Halving the tolerance per level would eventually ask for more than
  // double precision can give; stop at a few ulps of the panel magnitude.
  double floor = std::max(64 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right)),
                          4 * noise * (hi - lo));
  if (std::abs(left + right - whole) <= std::max(tol, floor) || depth >= 30) return left + right;
  return adaptive(f, lo, mid, left, 0.5 * tol, depth + 1, noise) +
         adaptive(f, mid, hi, right, 0.5 * tol, depth + 1, noise);
}

}  // namespace

double schlafli_increment(const Vec6& a_from, const Vec6& a_to) {
  if (!angles_admissible(a_from) || !angles_admissible(a_to))
    throw InadmissibleError("schlafli_increment: endpoint outside the angle polytope");
  Vec6 d = a_to - a_from;
  if (d.lpNorm<Eigen::Infinity>() == 0) return 0;
  SegmentIntegrand f{a_from, d};
  double whole = gauss_panel(f, 0, 1);
  // The 15-point rule is exact for smooth integrands far beyond the stated
  // tolerance; subdivision kicks in only near the polytope boundary.
  return -0.5 * adaptive(f, 0, 1, whole, kQuadratureTol, 0);
}

double schlafli_increment_lengths(const Vec6& x_from, const Vec6& x_to) {
  Vec6 a_from = angles_from_lengths(x_from), a_to = angles_from_lengths(x_to);
  Vec6 d = x_to - x_from;
  if (d.lpNorm<Eigen::Infinity>() == 0) return 0;
  try {
    LengthSegmentIntegrand f{x_from, d};
    double whole = gauss_panel(f, 0, 1);
    double noise = residual_target(x_from.cwiseMax(x_to)) * d.lpNorm<1>();
    double boundary = x_to.dot(a_to) - x_from.dot(a_from);
    return -0.5 * (boundary - adaptive(f, 0, 1, whole, kQuadratureTol, 0, noise));
  } catch (const InadmissibleError&) {
    return schlafli_increment(a_from, a_to);
  }
}

double schlafli_potential_at_angles(const Vec6& a) { return schlafli_increment(reference_angles(), a); }

double schlafli_potential(const Vec6& x) { return schlafli_increment_lengths(Vec6::Ones(), x); }

OracleResult minkowski_oracle(const Vec6& x) {
  require_positive(x);
  Eigen::Matrix4d gram = Eigen::Matrix4d::Identity();
  for (int e = 0; e < 6; ++e) {
    auto [v, w] = kEdgeVertices[e];
    gram(v, w) = gram(w, v) = -std::cosh(x[e]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(gram);
  const Eigen::Vector4d lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  OracleResult out;
  for (int k = 0; k < 4; ++k) {
    if (lambda[k] > 1e-14 * scale) ++out.positive;
    if (lambda[k] < -1e-14 * scale) ++out.negative;
  }
  if (out.positive != 3 || out.negative != 1) return out;

  // Rows of vecs are the polar vectors; metric eta = diag(sign lambda).
  Eigen::Vector4d eta = lambda.cwiseSign();
  Eigen::Matrix4d vecs = eig.eigenvectors() * lambda.cwiseAbs().cwiseSqrt().asDiagonal();
  auto inner = [&](const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
    return (p.array() * eta.array() * q.array()).sum();
  };

  std::array<Eigen::Vector4d, 4> normals;
  for (int f = 0; f < 4; ++f) {
    Eigen::Matrix<double, 3, 4> rows;
    int r = 0;
    for (int v = 0; v < 4; ++v)
      if (v != f) rows.row(r++) = vecs.row(v);
    // Euclidean generalized cross product, then raise the index with eta so
    // the result is Minkowski-orthogonal to the three vertex vectors.
    Eigen::Vector4d cross;
    for (int k = 0; k < 4; ++k) {
      Eigen::Matrix3d minor;
      int col = 0;
      for (int j = 0; j < 4; ++j)
        if (j != k) minor.col(col++) = rows.col(j);
      cross[k] = ((k % 2 == 0) ? 1.0 : -1.0) * minor.determinant();
    }
    Eigen::Vector4d n = eta.cwiseProduct(cross);
    double norm2 = inner(n, n);
    if (!(norm2 > 0)) return out;
    n /= std::sqrt(norm2);
    if (inner(n, vecs.row(f).transpose()) < 0) n = -n;
    normals[f] = n;
  }
  for (int e = 0; e < 6; ++e) {
    auto [v, w] = kEdgeVertices[e];
    auto [k, l] = others_in_face(v, w);
    double c = -inner(normals[k], normals[l]);
    if (!(std::abs(c) < 1)) return out;
    out.angles[e] = std::acos(c);
  }
  out.admissible = true;
  return out;
}

TetShape shape(const Vec6& x) {
  TetShape s;
  s.lengths = x;
  s.angles = angles_from_lengths(x);
  s.arcs = arcs_from_lengths(x);
  s.jac_ax = jacobian_a_wrt_x(x);
  s.jac_xa = s.jac_ax.inverse();
  return s;
}

Vec6 random_admissible_lengths(Rng& rng, double lo, double hi) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec6 x;
    for (int i = 0; i < 6; ++i) x[i] = rng.log_uniform(lo, hi);
    if (evaluate_angles(x).admissible) return x;
  }
  throw SolverError("random_admissible_lengths: rejection sampling exhausted");
}

ConvexityReport probe_length_space_convexity(int trials, std::uint64_t seed) {
  ConvexityReport report;
  report.seed = seed;
  report.trials = std::max(trials, 0);
  Rng rng(seed);
  for (int i = 0; i < report.trials; ++i) {
    Vec6 p = random_admissible_lengths(rng), q = random_admissible_lengths(rng);
    Vec6 mid = 0.5 * (p + q);
    AngleEvaluation ev = evaluate_angles(mid);
    if (!ev.admissible) {
      ++report.witnesses_found;
      report.witnesses.push_back({p, q, mid, ev.reason});
    }
  }
  return report;
}

}  // namespace hypflow::tetgeom
