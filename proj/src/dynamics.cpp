#include "hypflow/dynamics.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "hypflow/random.hpp"

namespace hypflow {
namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

FlowSample make_sample(double t, const ConeMetric& m) {
  FlowSample s;
  s.t = t;
  s.x = m.lengths();
  Energy en = energy(m);
  s.K = -en.grad;
  s.total_curv = s.K.squaredNorm();
  s.H = en.value;
  return s;
}

// Sample after a step: H is advanced by the volume change along the step,
// integrated in length space.
FlowSample next_sample(double t, const ConeMetric& m, const FlowSample& prev) {
  FlowSample s;
  s.t = t;
  s.x = m.lengths();
  s.K = curvature(m).K;
  s.total_curv = s.K.squaredNorm();
  const Triangulation& tri = m.triangulation();
  ConeMetric before(tri, prev.x);
  double dv = 0;
  for (int i = 0; i < tri.tet_count(); ++i)
    dv += tetgeom::schlafli_increment_lengths(before.tet_lengths(i), m.tet_lengths(i));
  s.H = prev.H + 2 * dv - (s.K.dot(s.x) - prev.K.dot(prev.x));
  return s;
}

std::string degeneration_witness(const MetricMargin& mm) {
  return fmt::format("tet {} vertex {} edge {}: cosine margin {:.3g}, vertex slack {:.3g}", mm.tet,
                     mm.vertex, mm.edge, mm.cosine_margin, mm.vertex_slack);
}

// K at x, or nothing when x lies outside the admissible set. Admissibility
// is checked before any curvature evaluation.
std::optional<Eigen::VectorXd> rhs(const Triangulation& tri, const Eigen::VectorXd& x) {
  ConeMetric m(tri, x);
  if (!is_admissible(m)) return std::nullopt;
  return curvature(m).K;
}

// Largest step keeping h * eig(J) inside [-2, 0], where both schemes are stable.
double stability_bound(const ConeMetric& m) {
  Eigen::MatrixXd J = curvature_jacobian(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (J + J.transpose()), Eigen::EigenvaluesOnly);
  double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return radius > 0 ? 2.0 / radius : std::numeric_limits<double>::infinity();
}

struct StepResult {
  bool ok = false;
  Eigen::VectorXd x;
  double error = 0;  // scaled error norm; <= 1 accepts (rkf45 only)
};

StepResult rk4_step(const Triangulation& tri, const Eigen::VectorXd& x, const Eigen::VectorXd& k1,
                    double h) {
  StepResult out;
  auto k2 = rhs(tri, x + 0.5 * h * k1);
  if (!k2) return out;
  auto k3 = rhs(tri, x + 0.5 * h * *k2);
  if (!k3) return out;
  auto k4 = rhs(tri, x + h * *k3);
  if (!k4) return out;
  out.x = x + h / 6.0 * (k1 + 2 * *k2 + 2 * *k3 + *k4);
  out.ok = true;
  return out;
}

// Runge-Kutta-Fehlberg 4(5); the fifth-order solution is propagated.
StepResult rkf45_step(const Triangulation& tri, const Eigen::VectorXd& x, const Eigen::VectorXd& k1,
                      double h, const FlowConfig& cfg) {
  StepResult out;
  auto k2 = rhs(tri, x + h * (1.0 / 4) * k1);
  if (!k2) return out;
  auto k3 = rhs(tri, x + h * ((3.0 / 32) * k1 + (9.0 / 32) * *k2));
  if (!k3) return out;
  auto k4 = rhs(tri, x + h * ((1932.0 / 2197) * k1 - (7200.0 / 2197) * *k2 + (7296.0 / 2197) * *k3));
  if (!k4) return out;
  auto k5 = rhs(tri, x + h * ((439.0 / 216) * k1 - 8.0 * *k2 + (3680.0 / 513) * *k3 -
                              (845.0 / 4104) * *k4));
  if (!k5) return out;
  auto k6 = rhs(tri, x + h * (-(8.0 / 27) * k1 + 2.0 * *k2 - (3544.0 / 2565) * *k3 +
                              (1859.0 / 4104) * *k4 - (11.0 / 40) * *k5));
  if (!k6) return out;
  Eigen::VectorXd fourth = x + h * ((25.0 / 216) * k1 + (1408.0 / 2565) * *k3 +
                                    (2197.0 / 4104) * *k4 - (1.0 / 5) * *k5);
  Eigen::VectorXd fifth = x + h * ((16.0 / 135) * k1 + (6656.0 / 12825) * *k3 +
                                   (28561.0 / 56430) * *k4 - (9.0 / 50) * *k5 + (2.0 / 55) * *k6);
  double err = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x[i]), std::abs(fifth[i]));
    err = std::max(err, std::abs(fifth[i] - fourth[i]) / scale);
  }
  out.x = fifth;
  out.error = err;
  out.ok = true;
  return out;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(t_max > 0) || !(initial_step > 0) || !(curvature_tol > 0) || !(degeneration_margin > 0) ||
      !(rel_tol > 0) || !(abs_tol > 0) || max_steps <= 0)
    throw std::invalid_argument("flow configuration values must be positive");
  if (curvature_tol < 1e-13) throw std::invalid_argument("curvature_tol must be at least 1e-13");
}

FlowTrace flow(const ConeMetric& m0, const FlowConfig& cfg) {
  cfg.validate();
  const Triangulation& tri = m0.triangulation();
  MetricMargin start = metric_margin(m0);
  if (!start.admissible)
    throw InadmissibleError("initial metric is inadmissible: " + start.reason, start.tet);

  FlowTrace trace;
  double t = 0, h = cfg.initial_step;
  ConeMetric current = m0;
  const bool adaptive = cfg.method == FlowMethod::rkf45_adaptive;
  double h_stable = adaptive ? stability_bound(current) : std::numeric_limits<double>::infinity();
  trace.samples.push_back(make_sample(t, current));

  auto terminal = [&](const MetricMargin& mm) {
    if (inf_norm(trace.samples.back().K) < cfg.curvature_tol) {
      trace.status = FlowStatus::converged;
      return true;
    }
    if (std::min(mm.cosine_margin, mm.vertex_slack) < cfg.degeneration_margin) {
      trace.status = FlowStatus::degenerated;
      trace.witness = degeneration_witness(mm);
      return true;
    }
    return false;
  };
  if (terminal(start)) return trace;

  while (true) {
    if (t >= cfg.t_max || trace.accepted_steps >= cfg.max_steps) {
      trace.status = FlowStatus::t_max_reached;
      return trace;
    }
    const double step = std::min({h, h_stable, cfg.t_max - t});
    if (step < 1e-14 * std::max(1.0, t))
      throw StepUnderflowError(fmt::format("step size underflow at t = {}", t), trace);

    const Eigen::VectorXd& x = current.lengths();
    const Eigen::VectorXd& k1 = trace.samples.back().K;
    StepResult res = adaptive ? rkf45_step(tri, x, k1, step, cfg) : rk4_step(tri, x, k1, step);
    if (!res.ok) {
      ++trace.rejected_steps;
      h = 0.5 * step;
      continue;
    }
    ConeMetric next(tri, res.x);
    MetricMargin mm = metric_margin(next);
    if (!mm.admissible || (adaptive && res.error > 1.0)) {
      ++trace.rejected_steps;
      if (adaptive && mm.admissible)
        h = step * std::max(0.1, 0.9 * std::pow(res.error, -0.2));
      else
        h = 0.5 * step;
      continue;
    }

    t += step;
    current = std::move(next);
    trace.samples.push_back(next_sample(t, current, trace.samples.back()));
    ++trace.accepted_steps;
    if (terminal(mm)) return trace;
    if (adaptive) {
      h = step * std::min(5.0, 0.9 * std::pow(std::max(res.error, 1e-10), -0.2));
      h_stable = stability_bound(current);
    }
  }
}

MinimizeResult minimize_energy(const ConeMetric& m0, double tol, int max_iterations) {
  const Triangulation& tri = m0.triangulation();
  MetricMargin start = metric_margin(m0);
  if (!start.admissible)
    throw InadmissibleError("initial metric is inadmissible: " + start.reason, start.tet);

  MinimizeReport report;
  ConeMetric current = m0;
  Eigen::VectorXd K = curvature(current).K;
  // Energy decreases below this are roundoff.
  constexpr double kNoiseFloor = 1e-13;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0;; ++iter) {
    double k_inf = inf_norm(K);
    report.curvature_history.push_back(k_inf);
    report.iterations = iter;
    if (k_inf < tol) {
      report.converged = true;
      report.final_curvature = k_inf;
      return {current, report};
    }
    if (iter >= max_iterations)
      throw SolverError(fmt::format("minimize_energy: no convergence after {} iterations (||K|| = {:.3g})",
                                    max_iterations, k_inf));

    Eigen::MatrixXd hessian = -curvature_jacobian(current);
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success)
      throw SolverError(fmt::format("minimize_energy: curvature Jacobian is not negative definite at iteration {}",
                                    iter));
    Eigen::VectorXd d = llt.solve(K);
    const double slope = -K.dot(d);  // directional derivative of H, negative

    bool accepted = false;
    double alpha = 1.0;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      Eigen::VectorXd trial_x = current.lengths() + alpha * d;
      ConeMetric trial(tri, trial_x);
      if (!is_admissible(trial)) continue;
      Eigen::VectorXd trial_K = curvature(trial).K;
      double dH = -(trial_K.dot(trial_x) - K.dot(current.lengths()));
      for (int t = 0; t < tri.tet_count(); ++t)
        dH += 2 * tetgeom::schlafli_increment_lengths(current.tet_lengths(t), trial.tet_lengths(t));
      bool armijo = dH <= kArmijo * alpha * slope;
      bool stalled = dH <= kNoiseFloor && inf_norm(trial_K) < k_inf;
      if (armijo || stalled) {
        current = std::move(trial);
        K = std::move(trial_K);
        report.step_lengths.push_back(alpha);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw SolverError(fmt::format("minimize_energy: line search failed at iteration {}", iter));
  }
}

AttractorReport attractor_experiment(const ConeMetric& equilibrium, double radius, int trials,
                                     std::uint64_t seed, const FlowConfig& cfg) {
  Eigen::VectorXd K = curvature(equilibrium).K;
  if (inf_norm(K) >= 1e-10)
    throw std::invalid_argument(
        fmt::format("attractor_experiment: metric is not an equilibrium (||K|| = {:.3g})", inf_norm(K)));
  AttractorReport report;
  report.seed = seed;
  report.radius = radius;
  report.trials = std::max(trials, 0);
  Rng rng(seed);
  const Eigen::VectorXd& x_eq = equilibrium.lengths();
  for (int i = 0; i < report.trials; ++i) {
    Eigen::VectorXd x = x_eq;
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += rng.uniform(-radius, radius);
    double dist = std::numeric_limits<double>::infinity();
    bool ok = false;
    ConeMetric start(equilibrium.triangulation(), x);
    if (is_admissible(start)) {
      try {
        FlowTrace tr = flow(start, cfg);
        dist = inf_norm(tr.samples.back().x - x_eq);
        ok = tr.status == FlowStatus::converged && dist < 1e-6;
      } catch (const Error&) {
      }
    }
    report.distances.push_back(dist);
    report.worst_distance = std::max(report.worst_distance, dist);
    if (ok) ++report.recovered;
  }
  report.recovery_fraction = report.trials ? double(report.recovered) / report.trials : 1.0;
  return report;
}

RigidityReport rigidity_probe(const ConeMetric& m) {
  Eigen::MatrixXd J = curvature_jacobian(m);
  RigidityReport r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  r.singular_values = svd.singularValues();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (J + J.transpose()), Eigen::EigenvaluesOnly);
  r.eigenvalues = eig.eigenvalues();
  r.largest_singular = r.singular_values.maxCoeff();
  r.smallest_singular = r.singular_values.minCoeff();
  r.condition_number = r.largest_singular / r.smallest_singular;
  r.nonsingular = r.smallest_singular > 1e-12 * r.largest_singular;
  return r;
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::degenerated: return "degenerated";
    case FlowStatus::t_max_reached: return "t_max_reached";
  }
  return "unknown";
}

std::string to_string(FlowMethod method) {
  return method == FlowMethod::rk4_fixed ? "rk4_fixed" : "rkf45_adaptive";
}

FlowMethod parse_flow_method(const std::string& name) {
  if (name == "rk4_fixed" || name == "rk4") return FlowMethod::rk4_fixed;
  if (name == "rkf45_adaptive" || name == "rkf45") return FlowMethod::rkf45_adaptive;
  throw std::invalid_argument("unknown flow method: " + name);
}

}  // namespace hypflow
