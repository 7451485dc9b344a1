#include "hypflow/checks.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "hypflow/angles.hpp"
#include "hypflow/dynamics.hpp"
#include "hypflow/errors.hpp"
#include "hypflow/metric.hpp"
#include "hypflow/random.hpp"
#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow::checks {

using nlohmann::json;
using tetgeom::Mat6;
using tetgeom::Vec6;

namespace {

constexpr double kPi = std::numbers::pi;

double regular_equilibrium_length() { return std::acosh(std::sqrt(3.0) / (2 * std::sqrt(3.0) - 2)); }

// Interior samples: lengths in [0.1, 3] with cosine margin at least 1e-3, so
// that step-1e-5 central differences are accurate.
Vec6 interior_lengths(Rng& rng) {
  while (true) {
    Vec6 x = tetgeom::random_admissible_lengths(rng, 0.1, 3.0);
    if (tetgeom::evaluate_angles(x).cosine_margin >= 1e-3) return x;
  }
}

double min_eigenvalue(const Mat6& m) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) { report_.seed = seed; }

  void run(const std::string& module, const std::string& name, const std::function<bool(json&)>& body) {
    CheckResult r{module, name, false, json::object()};
    try {
      r.passed = body(r.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail["exception"] = e.what();
    }
    report_.results.push_back(std::move(r));
  }

  SuiteReport take() { return std::move(report_); }

 private:
  SuiteReport report_;
};

// Euler characteristic of the whole boundary surface from the
// truncation-triangle complex alone: V from gluing triangle corners, E = 6N
// paired sides, F = 4N triangles.
int boundary_euler_from_cells(const GluingSpec& spec) {
  const int n = spec.tet_count;
  std::vector<int> parent(16 * n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  // Point (t, v, w): corner of the truncation triangle at v pointing to w.
  auto id = [](int t, int v, int w) { return 16 * t + 4 * v + w; };
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      for (int v = 0; v < 4; ++v)
        for (int w = 0; w < 4; ++w)
          if (v != w && v != f && w != f)
            parent[find(id(t, v, w))] = find(id(p.target_tet, p.perm[v], p.perm[w]));
    }
  int vertices = 0;
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < 4; ++v)
      for (int w = 0; w < 4; ++w)
        if (v != w && find(id(t, v, w)) == id(t, v, w)) ++vertices;
  return vertices - 6 * n + 4 * n;
}

}  // namespace

bool SuiteReport::all_passed() const {
  for (const CheckResult& r : results)
    if (!r.passed) return false;
  return true;
}

json SuiteReport::to_json() const {
  json checks = json::array();
  for (const CheckResult& r : results)
    checks.push_back({{"module", r.module}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  return {{"seed", seed}, {"all_passed", all_passed()}, {"checks", checks}};
}

SuiteReport run_property_suite(std::uint64_t seed) {
  Suite suite(seed);
  Rng rng(seed);
  const Triangulation census = Triangulation::build(census_two_tet());
  const double x_star = regular_equilibrium_length();

  std::vector<GluingSpec> instances = search_gluings(1, [](const Triangulation&) { return true; });
  instances.push_back(census_two_tet());

  // triangulation
  suite.run("triangulation", "orbit_closure_idempotent", [&](json& d) {
    bool ok = true;
    for (const GluingSpec& s : instances) {
      Triangulation a = Triangulation::analyze(s);
      Triangulation b = Triangulation::analyze(a.spec());
      for (int i = 0; i < a.edge_count() && ok; ++i)
        ok = a.edge_classes()[i].corners == b.edge_classes()[i].corners;
      ok = ok && a.edge_count() == b.edge_count();
    }
    d["instances"] = instances.size();
    return ok;
  });
  suite.run("triangulation", "valence_accounting", [&](json& d) {
    bool ok = true;
    for (const GluingSpec& s : instances) {
      Triangulation t = Triangulation::analyze(s);
      int total = 0;
      for (const EdgeClass& e : t.edge_classes()) total += e.valence();
      ok = ok && total == 6 * t.tet_count();
    }
    d["instances"] = instances.size();
    return ok;
  });
  suite.run("triangulation", "euler_additivity", [&](json& d) {
    bool ok = true;
    json per = json::array();
    for (const GluingSpec& s : instances) {
      Triangulation t = Triangulation::analyze(s);
      int cells = boundary_euler_from_cells(s);
      per.push_back({t.boundary_euler(), cells});
      ok = ok && cells == t.boundary_euler();
    }
    d["sum_vs_cells"] = per;
    return ok;
  });
  suite.run("triangulation", "permutation_sanity", [&](json&) {
    for (const GluingSpec& s : instances)
      for (int t = 0; t < s.tet_count; ++t)
        for (int f = 0; f < 4; ++f) {
          const FacePairing& p = s.at(t, f);
          const FacePairing& q = s.at(p.target_tet, p.target_face);
          for (int e = 0; e < 6; ++e) {
            auto [a, b] = kEdgeVertices[e];
            if (a == f || b == f) continue;
            int back = edge_index(q.perm[p.perm[a]], q.perm[p.perm[b]]);
            if (back != e) return false;
          }
        }
    return true;
  });

  // tetgeom
  std::vector<Vec6> samples;
  for (int i = 0; i < 200; ++i) samples.push_back(interior_lengths(rng));

  suite.run("tetgeom", "endpoint_consistency", [&](json& d) {
    double worst = 0;
    for (const Vec6& x : samples) worst = std::max(worst, tetgeom::evaluate_angles(x).endpoint_gap);
    d["max_gap"] = worst;
    return worst < 1e-10;
  });
  suite.run("tetgeom", "inverse_jacobian_spd", [&](json& d) {
    double asym = 0, min_eig = INFINITY;
    for (const Vec6& x : samples) {
      Mat6 inv = tetgeom::jacobian_x_wrt_a(x);
      asym = std::max(asym, (inv - inv.transpose()).cwiseAbs().maxCoeff());
      min_eig = std::min(min_eig, min_eigenvalue(inv));
    }
    d["max_asymmetry"] = asym;
    d["min_eigenvalue"] = min_eig;
    return asym < tetgeom::kSymmetryTol && min_eig > 0;
  });
  suite.run("tetgeom", "schlafli_exactness", [&](json& d) {
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const Vec6& x = samples[i];
      Vec6 a = tetgeom::angles_from_lengths(x);
      for (int k = 0; k < 6; ++k) {
        Vec6 ap = a, am = a;
        ap[k] += 1e-5;
        am[k] -= 1e-5;
        double fd = (tetgeom::schlafli_increment(a, ap) - tetgeom::schlafli_increment(a, am)) / 2e-5;
        worst = std::max(worst, std::abs(fd + 0.5 * x[k]));
      }
    }
    d["max_error"] = worst;
    return worst < 1e-6;
  });
  suite.run("tetgeom", "oracle_equivalence", [&](json& d) {
    int mismatched = 0;
    double worst = 0;
    Rng local(seed ^ 0x5eed);
    for (int i = 0; i < 500; ++i) {
      Vec6 x;
      for (int k = 0; k < 6; ++k) x[k] = local.log_uniform(0.02, 5.0);
      auto ev = tetgeom::evaluate_angles(x);
      auto oracle = tetgeom::minkowski_oracle(x);
      if (ev.admissible != oracle.admissible) ++mismatched;
      if (ev.admissible && oracle.admissible)
        worst = std::max(worst, (ev.angles - oracle.angles).lpNorm<Eigen::Infinity>());
    }
    d["classification_mismatches"] = mismatched;
    d["max_angle_error"] = worst;
    return mismatched == 0 && worst < tetgeom::kOracleTol;
  });
  suite.run("tetgeom", "inverse_roundtrips", [&](json& d) {
    double wx = 0, wa = 0;
    for (int i = 0; i < 100; ++i) {
      const Vec6& x = samples[i];
      Vec6 a = tetgeom::angles_from_lengths(x);
      wx = std::max(wx, (tetgeom::lengths_from_angles(a) - x).lpNorm<Eigen::Infinity>());
      wa = std::max(wa, (tetgeom::angles_from_lengths(tetgeom::lengths_from_angles(a)) - a)
                            .lpNorm<Eigen::Infinity>());
    }
    d["max_length_error"] = wx;
    d["max_angle_error"] = wa;
    return wx < 1e-9 && wa < 1e-9;
  });
  suite.run("tetgeom", "regular_family_monotone", [&](json& d) {
    // a(x) = arccos(cosh x / (2 cosh x - 1)) increases from 0 to pi/3.
    double prev = 0, small = 0, large = 0;
    bool monotone = true;
    for (int i = 0; i <= 400; ++i) {
      double x = std::exp(-6.0 + 8.7 * i / 400);  // 2.5e-3 .. 15
      double a = tetgeom::angles_from_lengths(Vec6::Constant(x))[0];
      if (i == 0) small = a;
      if (i == 400) large = a;
      monotone = monotone && a > prev;
      prev = a;
    }
    d["angle_at_small"] = small;
    d["angle_at_large"] = large;
    return monotone && small < 1e-2 && std::abs(large - kPi / 3) < 1e-3;
  });

  // metric
  std::vector<double> metric_samples;
  for (int i = 0; i < 50; ++i) metric_samples.push_back(rng.log_uniform(0.05, 5.0));

  suite.run("metric", "jacobian_negative_definite", [&](json& d) {
    double worst_fd = 0, max_eig = -INFINITY;
    for (double x : metric_samples) {
      ConeMetric m(census, Eigen::VectorXd::Constant(1, x));
      Eigen::MatrixXd J = curvature_jacobian(m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (J + J.transpose()));
      max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
      double h = 1e-5;
      double fd = (curvature(ConeMetric(census, Eigen::VectorXd::Constant(1, x + h))).K[0] -
                   curvature(ConeMetric(census, Eigen::VectorXd::Constant(1, x - h))).K[0]) /
                  (2 * h);
      worst_fd = std::max(worst_fd, std::abs(fd - J(0, 0)));
    }
    d["max_eigenvalue"] = max_eig;
    d["max_fd_error"] = worst_fd;
    return max_eig < 0 && worst_fd < 1e-6;
  });
  suite.run("metric", "assembly_linearity", [&](json&) {
    bool ok = true;
    for (double x : metric_samples) {
      ConeMetric m(census, Eigen::VectorXd::Constant(1, x));
      Eigen::MatrixXd J = curvature_jacobian(m);
      for (int drop = 0; drop < census.tet_count(); ++drop) {
        Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(J.rows(), J.cols());
        for (int t = 0; t < census.tet_count(); ++t) {
          if (t == drop) continue;
          Mat6 block = tetgeom::jacobian_a_wrt_x(m.tet_lengths(t));
          auto cls = census.tet_edge_classes(t);
          for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) partial(cls[i], cls[j]) -= block(i, j);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(J), part(partial);
        ok = ok && part.eigenvalues().maxCoeff() > full.eigenvalues().maxCoeff();
      }
    }
    return ok;
  });
  suite.run("metric", "not_scale_invariant", [&](json& d) {
    double smallest = INFINITY;
    for (double x : metric_samples) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
      double k1 = curvature(ConeMetric(census, v)).K[0];
      double k2 = curvature(ConeMetric(census, 1.5 * v)).K[0];
      smallest = std::min(smallest, std::abs(k1 - k2));
    }
    d["min_difference"] = smallest;
    return smallest > 0;
  });
  suite.run("metric", "energy_gradient", [&](json& d) {
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      double x = metric_samples[i], h = 1e-5;
      Energy en = energy(ConeMetric(census, Eigen::VectorXd::Constant(1, x)));
      double fd = (energy(ConeMetric(census, Eigen::VectorXd::Constant(1, x + h))).value -
                   energy(ConeMetric(census, Eigen::VectorXd::Constant(1, x - h))).value) /
                  (2 * h);
      worst = std::max(worst, std::abs(fd - en.grad[0]));
    }
    d["max_fd_error"] = worst;
    return worst < 1e-6;
  });

  // dynamics
  FlowConfig cfg;
  suite.run("dynamics", "lyapunov_monotone", [&](json& d) {
    double worst_h = 0, worst_k = 0;
    for (double x0 : {0.3, 1.0, 2.5}) {
      FlowTrace tr = flow(ConeMetric(census, Eigen::VectorXd::Constant(1, x0)), cfg);
      for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        worst_h = std::max(worst_h, tr.samples[i].H - tr.samples[i - 1].H);
        worst_k = std::max(worst_k, tr.samples[i].total_curv - tr.samples[i - 1].total_curv);
      }
    }
    d["max_H_increase"] = worst_h;
    d["max_total_curv_increase"] = worst_k;
    return worst_h <= 10 * cfg.abs_tol && worst_k <= 10 * cfg.abs_tol;
  });
  suite.run("dynamics", "heat_equation", [&](json& d) {
    double worst = 0;
    FlowTrace tr = flow(ConeMetric(census, Eigen::VectorXd::Constant(1, 1.0)), cfg);
    for (std::size_t i = 0; i < tr.samples.size(); i += std::max<std::size_t>(1, tr.samples.size() / 10)) {
      const FlowSample& s = tr.samples[i];
      ConeMetric m(census, s.x);
      Eigen::VectorXd jk = curvature_jacobian(m) * s.K;
      double h = 1e-5;
      Eigen::VectorXd fd = (curvature(ConeMetric(census, s.x + h * s.K)).K -
                            curvature(ConeMetric(census, s.x - h * s.K)).K) /
                           (2 * h);
      worst = std::max(worst, (fd - jk).lpNorm<Eigen::Infinity>());
    }
    d["max_error"] = worst;
    return worst < 1e-6;
  });
  suite.run("dynamics", "solver_agreement", [&](json& d) {
    ConeMetric start(census, Eigen::VectorXd::Constant(1, 1.0));
    FlowTrace tr = flow(start, cfg);
    MinimizeResult nm = minimize_energy(start, 1e-12);
    double gap = (tr.samples.back().x - nm.metric.lengths()).lpNorm<Eigen::Infinity>();
    d["gap"] = gap;
    d["distance_to_regular"] = std::abs(nm.metric.lengths()[0] - x_star);
    return tr.status == FlowStatus::converged && gap < 1e-7;
  });
  suite.run("dynamics", "determinism", [&](json&) {
    ConeMetric start(census, Eigen::VectorXd::Constant(1, 2.0));
    FlowTrace a = flow(start, cfg), b = flow(start, cfg);
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
      if (a.samples[i].t != b.samples[i].t || a.samples[i].x != b.samples[i].x ||
          a.samples[i].H != b.samples[i].H)
        return false;
    return true;
  });
  suite.run("dynamics", "rigidity", [&](json& d) {
    double worst = INFINITY;
    for (double x : metric_samples) {
      RigidityReport r = rigidity_probe(ConeMetric(census, Eigen::VectorXd::Constant(1, x)));
      worst = std::min(worst, r.smallest_singular / r.largest_singular);
    }
    d["min_relative_singular_value"] = worst;
    return worst > 1e-12;
  });

  // angles
  LPResult lp_result = lp_feasibility(census);
  suite.run("angles", "lp_witness_valid", [&](json& d) {
    AssignmentCheck c = check_assignment(census, lp_result.witness);
    d["epsilon"] = lp_result.epsilon;
    d["edge_residual"] = c.max_edge_residual;
    d["min_vertex_slack"] = c.min_vertex_slack;
    d["min_angle"] = c.min_angle;
    return lp_result.feasible && c.max_edge_residual < 1e-12 &&
           c.min_vertex_slack >= lp_result.epsilon - 1e-12 && c.min_angle >= lp_result.epsilon - 1e-12;
  });
  suite.run("angles", "simplex_determinism", [&](json&) {
    LPResult again = lp_feasibility(census);
    if (again.pivots != lp_result.pivots || again.epsilon != lp_result.epsilon) return false;
    for (int t = 0; t < census.tet_count(); ++t)
      if (again.witness.angles[t] != lp_result.witness.angles[t]) return false;
    return true;
  });
  suite.run("angles", "volume_concavity", [&](json& d) {
    ConcavityReport c = concavity_probe(census, uniform_assignment(census), 40, seed);
    d["max_second_difference"] = c.max_second_difference;
    d["violations"] = c.violations;
    return c.violations == 0;
  });
  suite.run("angles", "kkt_consistency", [&](json& d) {
    Rng local(seed ^ 0xa11);
    AngleAssignment start = random_structure(census, uniform_assignment(census), local, 0.2);
    VolumeResult vr = maximize_volume(census, start, 1e-10);
    double mean = vr.report.realization.mean_lengths.mean();
    d["max_spread"] = vr.report.realization.max_spread;
    d["iterations"] = vr.report.iterations;
    return vr.report.converged && vr.report.realization.max_spread < 1e-6 * mean;
  });

  return suite.take();
}

}  // namespace hypflow::checks
