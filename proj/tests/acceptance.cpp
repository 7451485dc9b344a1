// Acceptance run: one PASS/FAIL line per criterion. Usage:
//   acceptance <path to hypflow executable> [work dir]

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hypflow/angles.hpp"
#include "hypflow/dynamics.hpp"
#include "hypflow/io.hpp"
#include "hypflow/metric.hpp"
#include "hypflow/random.hpp"
#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hypflow;
using tetgeom::Mat6;
using tetgeom::Vec6;
using oracle::kPi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_cli;
fs::path g_work;

const Triangulation& census() {
  static const Triangulation tri = Triangulation::build(census_two_tet());
  return tri;
}

ConeMetric census_metric(double x) { return ConeMetric(census(), Eigen::VectorXd::Constant(1, x)); }

Vec6 interior_lengths(Rng& rng) {
  while (true) {
    Vec6 x;
    for (int i = 0; i < 6; ++i) x[i] = rng.uniform(0.1, 3.0);
    auto ev = tetgeom::evaluate_angles(x);
    if (ev.admissible && ev.cosine_margin > 1e-3 && ev.vertex_slack > 1e-3) return x;
  }
}

Outcome oracle_equivalence() {
  Rng rng(1001);
  int draws = 1000, admissible = 0, mismatched = 0;
  double worst = 0;
  for (int k = 0; k < draws; ++k) {
    Vec6 x;
    for (int i = 0; i < 6; ++i) x[i] = rng.log_uniform(0.01, 8.0);
    auto ev = tetgeom::evaluate_angles(x);
    auto mk = tetgeom::minkowski_oracle(x);
    if (ev.admissible != mk.admissible) {
      ++mismatched;
      continue;
    }
    if (!ev.admissible) continue;
    ++admissible;
    worst = std::max(worst, (ev.angles - mk.angles).cwiseAbs().maxCoeff());
  }
  return {mismatched == 0 && worst < tetgeom::kOracleTol && admissible > 0,
          fmt::format("{} draws, {} admissible, {} classification mismatches, max angle error {:.2e}", draws,
                      admissible, mismatched, worst)};
}

Outcome angle_jacobian() {
  Rng rng(2002);
  int shapes = 500, failures = 0;
  double asym = 0, fd_err = 0, min_eig = INFINITY, inv_asym = 0, inv_min_eig = INFINITY;
  for (int k = 0; k < shapes; ++k) {
    Vec6 x = interior_lengths(rng);
    Mat6 J = tetgeom::jacobian_a_wrt_x(x);
    Mat6 Fd;
    const double h = 1e-5;
    for (int j = 0; j < 6; ++j) {
      Vec6 p = x, m = x;
      p[j] += h;
      m[j] -= h;
      Fd.col(j) = (tetgeom::angles_from_lengths(p) - tetgeom::angles_from_lengths(m)) / (2 * h);
    }
    Mat6 Ji = tetgeom::jacobian_x_wrt_a(x);
    Eigen::SelfAdjointEigenSolver<Mat6> e1(0.5 * (J + J.transpose())), e2(0.5 * (Ji + Ji.transpose()));
    double a = (J - J.transpose()).cwiseAbs().maxCoeff();
    double f = (J - Fd).cwiseAbs().maxCoeff();
    double ai = (Ji - Ji.transpose()).cwiseAbs().maxCoeff();
    asym = std::max(asym, a);
    fd_err = std::max(fd_err, f);
    inv_asym = std::max(inv_asym, ai);
    min_eig = std::min(min_eig, e1.eigenvalues().minCoeff());
    inv_min_eig = std::min(inv_min_eig, e2.eigenvalues().minCoeff());
    if (a >= tetgeom::kSymmetryTol || f >= 1e-6 || ai >= tetgeom::kSymmetryTol || e1.eigenvalues().minCoeff() <= 0 ||
        e2.eigenvalues().minCoeff() <= 0)
      ++failures;
  }
  return {failures == 0,
          fmt::format("{} shapes, max asymmetry {:.1e}, max FD error {:.1e}, min eigenvalue {:.3g}; inverse: "
                      "max asymmetry {:.1e}, min eigenvalue {:.3g}",
                      shapes, asym, fd_err, min_eig, inv_asym, inv_min_eig)};
}

Outcome schlafli() {
  Rng rng(3003);
  int shapes = 100;
  double fd_err = 0;
  for (int k = 0; k < shapes; ++k) {
    Vec6 x = interior_lengths(rng);
    Vec6 a = tetgeom::angles_from_lengths(x);
    for (int i = 0; i < 6; ++i) {
      Vec6 p = a, m = a;
      const double h = 1e-5;
      p[i] += h;
      m[i] -= h;
      double fd = tetgeom::schlafli_increment(m, p) / (2 * h);
      fd_err = std::max(fd_err, std::abs(fd + x[i] / 2));
    }
  }
  int probes = 0;
  double path_err = 0;
  while (probes < 20) {
    Vec6 a0 = tetgeom::angles_from_lengths(interior_lengths(rng));
    Vec6 a1 = tetgeom::angles_from_lengths(interior_lengths(rng));
    Vec6 via = tetgeom::angles_from_lengths(interior_lengths(rng));
    // The angle polytope is convex, so all three segments stay inside.
    double direct = tetgeom::schlafli_increment(a0, a1);
    double bent = tetgeom::schlafli_increment(a0, via) + tetgeom::schlafli_increment(via, a1);
    path_err = std::max(path_err, std::abs(direct - bent));
    ++probes;
  }
  return {fd_err < 1e-6 && path_err < 2e-9,
          fmt::format("{} shapes, max |dV/da + x/2| {:.1e}; {} two-path probes, max discrepancy {:.1e}", shapes,
                      fd_err, probes, path_err)};
}

Outcome curvature_flow_monotone() {
  Rng rng(4004);
  int metrics = 100, not_definite = 0;
  double asym = 0;
  for (const auto& s : search_gluings(2, one_edge_hyperbolic_boundary)) {
    Triangulation tri = Triangulation::build(s);
    for (int k = 0; k < metrics; ++k) {
      ConeMetric m(tri, Eigen::VectorXd::Constant(1, rng.log_uniform(0.02, 5.0)));
      Eigen::MatrixXd J = curvature_jacobian(m);
      asym = std::max(asym, (J - J.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (J + J.transpose()));
      if (es.eigenvalues().maxCoeff() >= 0) ++not_definite;
    }
  }
  FlowConfig adaptive;
  FlowConfig fine;
  fine.method = FlowMethod::rk4_fixed;
  fine.initial_step = 1e-3;
  const double allowance = 10 * adaptive.rel_tol;
  int trajectories = 10, violations = 0;
  double worst_rise = 0, worst_fd = 0;
  for (int k = 0; k < trajectories; ++k) {
    double x0 = rng.log_uniform(0.05, 5.0);
    for (const FlowConfig* cfg : {&adaptive, &fine}) {
      FlowTrace tr = flow(census_metric(x0), *cfg);
      for (size_t i = 1; i < tr.samples.size(); ++i) {
        const auto& p = tr.samples[i - 1];
        const auto& q = tr.samples[i];
        double rise = std::max(q.total_curv - p.total_curv, q.H - p.H);
        worst_rise = std::max(worst_rise, rise);
        if (q.total_curv - p.total_curv > allowance * std::max(1.0, p.total_curv) ||
            q.H - p.H > allowance * std::max(1.0, std::abs(p.H)))
          ++violations;
      }
      if (cfg != &fine) continue;
      for (size_t i = 1; i + 1 < tr.samples.size(); ++i) {
        const auto& a = tr.samples[i - 1];
        const auto& b = tr.samples[i + 1];
        Eigen::VectorXd fd = (b.K - a.K) / (b.t - a.t);
        Eigen::VectorXd jk = curvature_jacobian(ConeMetric(census(), tr.samples[i].x)) * tr.samples[i].K;
        double err = (fd - jk).cwiseAbs().maxCoeff() / std::max(1e-8, jk.cwiseAbs().maxCoeff());
        if (jk.cwiseAbs().maxCoeff() > 1e-6) worst_fd = std::max(worst_fd, err);
      }
    }
  }
  return {not_definite == 0 && asym < 1e-8 && violations == 0 && worst_fd < 1e-4,
          fmt::format("{} metrics x 8 instances negative definite (asymmetry {:.1e}, failures {}); {} trajectories x 2 "
                      "integrators, {} monotonicity violations (largest rise {:.1e}); dK/dt vs JK relative error {:.1e}",
                      metrics, asym, not_definite, trajectories, violations, worst_rise, worst_fd)};
}

double g_flow_limit = NAN;

Outcome convergence() {
  const double xs = oracle::equilibrium_length();
  const double closed = std::acosh(std::sqrt(3.0) / (2 * std::sqrt(3.0) - 2));
  FlowTrace tr = flow(census_metric(1.0));
  const auto& last = tr.samples.back();
  g_flow_limit = last.x[0];
  double k_inf = last.K.cwiseAbs().maxCoeff();
  bool flow_ok = tr.status == FlowStatus::converged && k_inf < 1e-12 && std::abs(last.x[0] - xs) < 1e-8;

  MinimizeResult newton = minimize_energy(census_metric(1.0), 1e-12);
  AttractorReport att = attractor_experiment(newton.metric, 0.01, 50, 505);
  double newton_gap = std::abs(newton.metric.lengths()[0] - xs);
  bool newton_ok = newton.report.converged && newton.report.iterations <= 20 && newton_gap < 1e-10;
  return {flow_ok && att.recovered == att.trials && newton_ok && std::abs(closed - xs) < 1e-12,
          fmt::format("flow: {} at t = {:.4g}, |K| = {:.1e}, |x - x*| = {:.1e} (x* = {:.12f}); attractor {}/{}; "
                      "Newton {} iterations, |x - x*| = {:.1e}",
                      to_string(tr.status), last.t, k_inf, std::abs(last.x[0] - xs), xs, att.recovered, att.trials,
                      newton.report.iterations, newton_gap)};
}

Outcome rigidity() {
  Rng rng(6006);
  int sampled = 0, singular = 0;
  double worst_ratio = INFINITY;
  std::vector<Triangulation> instances;
  for (const auto& s : search_gluings(2, [](const Triangulation&) { return true; })) instances.push_back(Triangulation::analyze(s));
  for (const auto& tri : instances) {
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd x(tri.edge_count());
      for (int i = 0; i < x.size(); ++i) x[i] = rng.log_uniform(0.02, 5.0);
      ConeMetric m(tri, x);
      if (!is_admissible(m)) continue;
      RigidityReport r = rigidity_probe(m);
      ++sampled;
      worst_ratio = std::min(worst_ratio, r.smallest_singular / r.largest_singular);
      if (!r.nonsingular) ++singular;
    }
  }
  return {sampled > 0 && singular == 0,
          fmt::format("{} admissible metrics on {} two-tetrahedron gluings, {} singular, smallest sigma_min/sigma_max "
                      "{:.2e}",
                      sampled, instances.size(), singular, worst_ratio)};
}

bool substitution_ok(const AngleAssignment& a, double* residual, double* slack, double* min_angle) {
  // Direct substitution, independent of check_assignment.
  const Triangulation& tri = census();
  std::vector<double> sums(tri.edge_count(), 0);
  *min_angle = INFINITY;
  *slack = INFINITY;
  for (int t = 0; t < tri.tet_count(); ++t) {
    for (int e = 0; e < 6; ++e) {
      sums[tri.edge_class_of(t, e)] += a.angles[t][e];
      *min_angle = std::min(*min_angle, a.angles[t][e]);
    }
    for (int v = 0; v < 4; ++v) {
      double s = 0;
      for (int e = 0; e < 6; ++e)
        if (kEdgeVertices[e][0] == v || kEdgeVertices[e][1] == v) s += a.angles[t][e];
      *slack = std::min(*slack, kPi - s);
    }
  }
  *residual = 0;
  for (double s : sums) *residual = std::max(*residual, std::abs(s - 2 * kPi));
  return *residual < 1e-12 && *slack > 0 && *min_angle > 0;
}

Outcome lp_structure() {
  LPResult r = lp_feasibility(census());
  double res1, slack1, min1, res2, slack2, min2;
  bool witness_ok = r.feasible && substitution_ok(r.witness, &res1, &slack1, &min1);
  AngleAssignment sym{std::vector<Vec6>(2, Vec6::Constant(kPi / 6))};
  bool sym_ok = substitution_ok(sym, &res2, &slack2, &min2);
  return {r.feasible && r.epsilon > 0 && witness_ok && sym_ok,
          fmt::format("feasible = {}, epsilon = {:.12f} (pi/6 = {:.12f}); witness residual {:.1e}, vertex slack {:.4f}; "
                      "pi/6 assignment residual {:.1e}, vertex slack {:.4f}",
                      r.feasible, r.epsilon, kPi / 6, res1, slack1, res2, slack2)};
}

Outcome volume_maximization() {
  LPResult lp = lp_feasibility(census());
  Rng rng(8008);
  double worst_spread = 0, worst_gap = 0;
  int runs = 0;
  std::vector<AngleAssignment> starts{lp.witness};
  for (int k = 0; k < 4; ++k) starts.push_back(random_structure(census(), lp.witness, rng, 0.3));
  bool all_converged = true;
  for (const auto& s : starts) {
    VolumeResult v = maximize_volume(census(), s, 1e-10);
    all_converged = all_converged && v.report.converged;
    worst_spread = std::max(worst_spread, v.report.realization.max_spread);
    worst_gap = std::max(worst_gap, std::abs(v.report.realization.mean_lengths[0] - g_flow_limit));
    ++runs;
  }
  ConcavityReport cc = concavity_probe(census(), lp.witness, 200, 808);
  return {all_converged && worst_spread < 1e-6 && worst_gap < 1e-6 && cc.violations == 0,
          fmt::format("{} starts, max corner-length spread {:.1e}, max |x - flow limit| {:.1e}; {} concavity probes, "
                      "{} violations, largest second difference {:.2e}",
                      runs, worst_spread, worst_gap, cc.probes, cc.violations, cc.max_second_difference)};
}

Outcome non_convexity() {
  tetgeom::ConvexityReport rep = tetgeom::probe_length_space_convexity(1000, 909);
  fs::path file = g_work / "convexity_witnesses.json";
  io::write_json_file(file.string(), io::convexity_to_json(rep));
  auto back = io::read_json_file(file.string());
  bool persisted = back["witnesses"].size() == rep.witnesses.size();
  bool verified = !back["witnesses"].empty();
  for (const auto& w : back["witnesses"]) {
    auto vec = [](const io::json& j) {
      Vec6 v;
      for (int i = 0; i < 6; ++i) v[i] = j[i].get<double>();
      return v;
    };
    Vec6 p = vec(w["first"]), q = vec(w["second"]);
    verified = verified && tetgeom::evaluate_angles(p).admissible && tetgeom::evaluate_angles(q).admissible &&
               !tetgeom::evaluate_angles(0.5 * (p + q)).admissible;
  }
  return {rep.witnesses_found > 0 && persisted && verified,
          fmt::format("{} trials, {} witnesses, re-verified from {}", rep.trials, rep.witnesses_found,
                      file.filename().string())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  if (g_cli.empty()) return {false, "no hypflow executable given"};
  fs::path dir = g_work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  auto sh = [&](const std::string& args) {
    std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", g_cli, args, p("log.txt"));
    return std::system(cmd.c_str());
  };
  if (sh(fmt::format("search --tets 2 --out {} --emit-first {}", p("s.json"), p("census.json"))) != 0)
    return {false, "search failed"};
  io::write_json_file(p("unit.json"), io::metric_to_json(Eigen::VectorXd::Ones(1)));
  sh(fmt::format("minimize --tri {} --metric {} --out {}", p("census.json"), p("unit.json"), p("eq.json")));

  // (label, command with {} for the output stem)
  std::vector<std::pair<std::string, std::string>> cmds{
      {"search", "search --tets 2 --predicate all --out {}.json"},
      {"flow", fmt::format("flow --tri {} --metric {} --out {{}}.json --trace {{}}.csv", p("census.json"), p("unit.json"))},
      {"minimize", fmt::format("minimize --tri {} --metric {} --out {{}}.json", p("census.json"), p("unit.json"))},
      {"lp", fmt::format("lp --tri {} --out {{}}.json", p("census.json"))},
      {"volmax", fmt::format("volmax --tri {} --out {{}}.json", p("census.json"))},
      {"shapes", fmt::format("shapes --tri {} --metric {} --out {{}}.json", p("census.json"), p("unit.json"))},
      {"attractor", fmt::format("attractor --tri {} --metric {} --trials 20 --seed 42 --out {{}}.json",
                                p("census.json"), p("eq.json"))},
      {"convexity", "convexity --trials 500 --seed 42 --out {}.json"},
      {"propsuite", "propsuite --seed 42 --out {}.json"},
  };
  int identical = 0;
  std::string differing;
  for (const auto& [label, tmpl] : cmds) {
    // Same arguments both times, so the embedded manifests are identical.
    std::string stem = p(label);
    std::string args = tmpl;
    for (size_t pos; (pos = args.find("{}")) != std::string::npos;) args.replace(pos, 2, stem);
    std::vector<std::string> outputs;
    for (int run = 0; run < 2; ++run) {
      fs::remove(stem + ".json");
      fs::remove(stem + ".csv");
      sh(args);
      std::string blob = slurp(stem + ".json");
      if (fs::exists(stem + ".csv")) blob += slurp(stem + ".csv");
      outputs.push_back(blob);
    }
    if (!outputs[0].empty() && outputs[0] == outputs[1])
      ++identical;
    else
      differing += " " + label;
  }
  return {identical == static_cast<int>(cmds.size()),
          fmt::format("{}/{} commands byte-identical on rerun{}", identical, cmds.size(),
                      differing.empty() ? "" : "; differing:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  g_cli = argc > 1 ? argv[1] : "";
  g_work = argc > 2 ? fs::path(argv[2]) : fs::current_path() / "acceptance_out";
  fs::create_directories(g_work);

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"angle Jacobian symmetric positive definite", angle_jacobian},
      {"Schlafli gradient and path independence", schlafli},
      {"curvature Jacobian and Lyapunov monotonicity", curvature_flow_monotone},
      {"flow, attractor and Newton reach x*", convergence},
      {"curvature Jacobian nonsingular", rigidity},
      {"LP feasibility and pi/6 substitution", lp_structure},
      {"volume maximization and concavity", volume_maximization},
      {"length-space non-convexity witness", non_convexity},
      {"byte-identical reruns", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} criterion {:>2} ({}): {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
