#include "hypflow/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "hypflow/angles.hpp"
#include "hypflow/checks.hpp"
#include "hypflow/dynamics.hpp"
#include "hypflow/errors.hpp"
#include "hypflow/io.hpp"
#include "hypflow/metric.hpp"
#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow::cli {
namespace {

using io::json;

std::string utc_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// The manifest embedded in outputs carries no timestamps, so equal manifests
// give byte-identical files; timestamps live in the <out>.manifest.json
// sidecar.
struct Manifest {
  std::string command;
  json inputs = json::object();
  json config = json::object();
  std::string started = utc_now();

  json embedded() const {
    return {{"command", command}, {"inputs", inputs}, {"config", config}, {"version", kVersion}};
  }
  void write_sidecar(const std::string& out) const {
    json doc = embedded();
    doc["started"] = started;
    doc["finished"] = utc_now();
    io::write_json_file(out + ".manifest.json", doc);
  }
};

void emit(const std::string& out, json doc, const Manifest& manifest) {
  doc["manifest"] = manifest.embedded();
  io::write_json_file(out, doc);
  manifest.write_sidecar(out);
}

Triangulation load_triangulation(const std::string& path) {
  return Triangulation::build(io::gluing_from_json(io::read_json_file(path)));
}

ConeMetric load_metric(const Triangulation& tri, const std::string& path) {
  Eigen::VectorXd x = io::metric_from_json(io::read_json_file(path));
  if (x.size() != tri.edge_count())
    throw InputError(fmt::format("{}: {} lengths given, triangulation has {} edge classes", path, x.size(),
                                 tri.edge_count()));
  return ConeMetric(tri, x);
}

GluingPredicate predicate_by_name(const std::string& name) {
  if (name == "one-edge-hyperbolic") return one_edge_hyperbolic_boundary;
  if (name == "hyperbolic-boundary") return [](const Triangulation& t) { return t.boundary_hyperbolic(); };
  if (name == "nonnegative-euler") return [](const Triangulation& t) { return !t.boundary_hyperbolic(); };
  if (name == "torus-boundary")
    return [](const Triangulation& t) {
      for (const VertexClass& v : t.vertex_classes())
        if (v.link_euler != 0) return false;
      return true;
    };
  if (name == "all") return [](const Triangulation&) { return true; };
  throw InputError("unknown predicate: " + name);
}

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 ok; 1 property violation; 2 ill-formed input or structural gluing error; "
    "3 boundary Euler characteristic >= 0; 4 flow degenerated; 5 flow reached t_max; "
    "6 inadmissible geometry; 7 solver failure.";

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Combinatorial curvature flow on ideally triangulated 3-manifolds with boundary"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string tri_path, metric_path, angles_path, out_path, trace_path, method = "rkf45_adaptive";
  std::string predicate = "one-edge-hyperbolic", emit_first;
  std::uint64_t seed = 0;
  int tets = 2, trials = 1000;
  double tol = 1e-12, volmax_tol = 1e-10, radius = 0.01;
  FlowConfig flow_cfg;

  auto* validate = app.add_subcommand("validate", "Check a triangulation and report edge/vertex classes");
  validate->add_option("--tri", tri_path, "Triangulation JSON")->required();
  validate->add_option("--out", out_path, "Report JSON");

  auto* search = app.add_subcommand("search", "Exhaustive gluing search (1 or 2 tetrahedra)");
  search->add_option("--tets", tets, "Number of tetrahedra")->check(CLI::Range(1, 2));
  search->add_option("--predicate", predicate,
                     "one-edge-hyperbolic | hyperbolic-boundary | nonnegative-euler | torus-boundary | all");
  search->add_option("--out", out_path, "List of gluings (JSON)")->required();
  search->add_option("--emit-first", emit_first, "Write the first gluing as a triangulation file");

  auto* shapes = app.add_subcommand("shapes", "Per-tetrahedron geometry and curvature report");
  shapes->add_option("--tri", tri_path)->required();
  shapes->add_option("--metric", metric_path)->required();
  shapes->add_option("--out", out_path)->required();

  auto* flow_cmd = app.add_subcommand("flow", "Integrate dx/dt = K");
  flow_cmd->add_option("--tri", tri_path)->required();
  flow_cmd->add_option("--metric", metric_path)->required();
  flow_cmd->add_option("--out", out_path, "Status JSON")->required();
  flow_cmd->add_option("--trace", trace_path, "Trace CSV (default: <out> with .csv)");
  flow_cmd->add_option("--t-max", flow_cfg.t_max);
  flow_cmd->add_option("--tol", flow_cfg.curvature_tol, "Stop when ||K||_inf falls below");
  flow_cmd->add_option("--method", method, "rkf45_adaptive | rk4_fixed");
  flow_cmd->add_option("--margin", flow_cfg.degeneration_margin, "Degeneration margin");
  flow_cmd->add_option("--step", flow_cfg.initial_step, "Initial (or fixed) step");

  auto* minimize = app.add_subcommand("minimize", "Newton minimization of the energy");
  minimize->add_option("--tri", tri_path)->required();
  minimize->add_option("--metric", metric_path)->required();
  minimize->add_option("--tol", tol);
  minimize->add_option("--out", out_path, "Critical metric JSON")->required();

  auto* lp_cmd = app.add_subcommand("lp", "Linear hyperbolic structure feasibility");
  lp_cmd->add_option("--tri", tri_path)->required();
  lp_cmd->add_option("--out", out_path)->required();

  auto* volmax = app.add_subcommand("volmax", "Maximize volume over linear hyperbolic structures");
  volmax->add_option("--tri", tri_path)->required();
  volmax->add_option("--angles", angles_path, "Start assignment (default: LP witness)");
  volmax->add_option("--tol", volmax_tol, "Projected gradient tolerance");
  volmax->add_option("--out", out_path)->required();

  auto* attractor = app.add_subcommand("attractor", "Perturb an equilibrium and flow back");
  attractor->add_option("--tri", tri_path)->required();
  attractor->add_option("--metric", metric_path, "Equilibrium metric")->required();
  attractor->add_option("--radius", radius);
  attractor->add_option("--trials", trials);
  attractor->add_option("--seed", seed);
  attractor->add_option("--out", out_path)->required();

  auto* convexity = app.add_subcommand("convexity", "Search for midpoint-inadmissible length pairs");
  convexity->add_option("--trials", trials);
  convexity->add_option("--seed", seed);
  convexity->add_option("--out", out_path)->required();

  auto* propsuite = app.add_subcommand("propsuite", "Run the invariant battery of every module");
  propsuite->add_option("--seed", seed);
  propsuite->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  Manifest manifest;
  try {
    if (*validate) {
      manifest.command = "validate";
      manifest.inputs = {{"tri", tri_path}};
      GluingSpec spec = io::gluing_from_json(io::read_json_file(tri_path));
      Triangulation analyzed = Triangulation::analyze(spec);
      json report = io::edge_report(analyzed);
      report["boundary_hyperbolic"] = analyzed.boundary_hyperbolic();
      if (!out_path.empty()) emit(out_path, report, manifest);
      fmt::print("{} tetrahedra, {} edge classes, {} vertex classes, boundary chi {}\n", analyzed.tet_count(),
                 analyzed.edge_count(), analyzed.vertex_classes().size(), analyzed.boundary_euler());
      Triangulation::build(spec);
      return kOk;
    }

    if (*search) {
      manifest.command = "search";
      manifest.config = {{"tets", tets}, {"predicate", predicate}};
      auto found = search_gluings(tets, predicate_by_name(predicate));
      json list = json::array();
      for (const GluingSpec& s : found) list.push_back(io::gluing_to_json(s));
      emit(out_path, {{"count", found.size()}, {"gluings", list}}, manifest);
      if (!emit_first.empty()) {
        if (found.empty()) throw InputError("search found no gluings; nothing to emit");
        io::write_json_file(emit_first, io::gluing_to_json(found.front()));
      }
      fmt::print("{} gluing(s) found\n", found.size());
      return kOk;
    }

    if (*shapes) {
      manifest.command = "shapes";
      manifest.inputs = {{"tri", tri_path}, {"metric", metric_path}};
      Triangulation tri = load_triangulation(tri_path);
      ConeMetric m = load_metric(tri, metric_path);
      json tets_json = json::array();
      for (int t = 0; t < tri.tet_count(); ++t) {
        json s = io::shape_to_json(tetgeom::shape(m.tet_lengths(t)));
        s["volume_rel"] = tetgeom::schlafli_potential(m.tet_lengths(t));
        tets_json.push_back(s);
      }
      RigidityReport rig = rigidity_probe(m);
      json doc{{"tetrahedra", tets_json},
               {"curvature", io::curvature_report(evaluate(m))},
               {"rigidity",
                {{"singular_values", io::vector_to_json(rig.singular_values)},
                 {"condition_number", rig.condition_number},
                 {"nonsingular", rig.nonsingular}}}};
      emit(out_path, doc, manifest);
      fmt::print("{} tetrahedra evaluated\n", tri.tet_count());
      return kOk;
    }

    if (*flow_cmd) {
      flow_cfg.method = parse_flow_method(method);
      if (trace_path.empty()) trace_path = std::filesystem::path(out_path).replace_extension(".csv").string();
      manifest.command = "flow";
      manifest.inputs = {{"tri", tri_path}, {"metric", metric_path}};
      manifest.config = {{"t_max", flow_cfg.t_max},     {"tol", flow_cfg.curvature_tol},
                         {"method", method},            {"margin", flow_cfg.degeneration_margin},
                         {"step", flow_cfg.initial_step}, {"rel_tol", flow_cfg.rel_tol},
                         {"abs_tol", flow_cfg.abs_tol}, {"trace", trace_path}};
      Triangulation tri = load_triangulation(tri_path);
      ConeMetric m = load_metric(tri, metric_path);
      FlowTrace trace;
      try {
        trace = flow(m, flow_cfg);
      } catch (const StepUnderflowError& e) {
        io::write_text_file(trace_path, io::trace_csv(e.trace()));
        json status = io::trace_status(e.trace());
        status["status"] = "step_underflow";
        status["error"] = e.what();
        emit(out_path, status, manifest);
        throw;
      }
      io::write_text_file(trace_path, io::trace_csv(trace));
      emit(out_path, io::trace_status(trace), manifest);
      fmt::print("flow {} after {} steps (t = {:.6g}, |K|_inf = {:.3g})\n", to_string(trace.status),
                 trace.accepted_steps, trace.samples.back().t,
                 trace.samples.back().K.lpNorm<Eigen::Infinity>());
      switch (trace.status) {
        case FlowStatus::converged: return kOk;
        case FlowStatus::degenerated: return kDegenerated;
        case FlowStatus::t_max_reached: return kTMaxReached;
      }
      return kOk;
    }

    if (*minimize) {
      manifest.command = "minimize";
      manifest.inputs = {{"tri", tri_path}, {"metric", metric_path}};
      manifest.config = {{"tol", tol}};
      Triangulation tri = load_triangulation(tri_path);
      MinimizeResult res = minimize_energy(load_metric(tri, metric_path), tol);
      json doc = io::metric_to_json(res.metric.lengths());
      doc["report"] = {{"converged", res.report.converged},
                       {"iterations", res.report.iterations},
                       {"final_curvature", res.report.final_curvature},
                       {"curvature_history", res.report.curvature_history},
                       {"step_lengths", res.report.step_lengths}};
      emit(out_path, doc, manifest);
      fmt::print("converged in {} Newton iterations, |K|_inf = {:.3g}\n", res.report.iterations,
                 res.report.final_curvature);
      return kOk;
    }

    if (*lp_cmd) {
      manifest.command = "lp";
      manifest.inputs = {{"tri", tri_path}};
      Triangulation tri = load_triangulation(tri_path);
      LPResult res = lp_feasibility(tri);
      emit(out_path, io::lp_to_json(res), manifest);
      fmt::print("{} (epsilon = {:.6g})\n", res.feasible ? "feasible" : "infeasible", res.epsilon);
      return kOk;
    }

    if (*volmax) {
      manifest.command = "volmax";
      manifest.inputs = {{"tri", tri_path}, {"angles", angles_path}};
      manifest.config = {{"tol", volmax_tol}};
      Triangulation tri = load_triangulation(tri_path);
      AngleAssignment start;
      if (angles_path.empty()) {
        LPResult lp = lp_feasibility(tri);
        if (!lp.feasible) throw InadmissibleError("triangulation supports no linear hyperbolic structure");
        start = lp.witness;
      } else {
        start = io::assignment_from_json(io::read_json_file(angles_path));
      }
      VolumeResult res = maximize_volume(tri, start, volmax_tol);
      json doc = io::assignment_to_json(res.angles);
      doc["report"] = {{"converged", res.report.converged},
                       {"iterations", res.report.iterations},
                       {"volume_rel", res.report.volume},
                       {"projected_gradient", res.report.projected_gradient},
                       {"edge_lengths", io::vector_to_json(res.report.realization.mean_lengths)},
                       {"length_spread", io::vector_to_json(res.report.realization.spread)}};
      emit(out_path, doc, manifest);
      fmt::print("converged in {} iterations, max length spread {:.3g}\n", res.report.iterations,
                 res.report.realization.max_spread);
      return kOk;
    }

    if (*attractor) {
      manifest.command = "attractor";
      manifest.inputs = {{"tri", tri_path}, {"metric", metric_path}};
      manifest.config = {{"radius", radius}, {"trials", trials}, {"seed", seed}};
      Triangulation tri = load_triangulation(tri_path);
      AttractorReport rep = attractor_experiment(load_metric(tri, metric_path), radius, trials, seed);
      json doc{{"seed", rep.seed},
               {"radius", rep.radius},
               {"trials", rep.trials},
               {"recovered", rep.recovered},
               {"recovery_fraction", rep.recovery_fraction},
               {"worst_distance", rep.worst_distance},
               {"distances", rep.distances}};
      emit(out_path, doc, manifest);
      fmt::print("{}/{} trials recovered\n", rep.recovered, rep.trials);
      return kOk;
    }

    if (*convexity) {
      manifest.command = "convexity";
      manifest.config = {{"trials", trials}, {"seed", seed}};
      tetgeom::ConvexityReport rep = tetgeom::probe_length_space_convexity(trials, seed);
      emit(out_path, io::convexity_to_json(rep), manifest);
      fmt::print("{} non-convexity witness(es) in {} trials\n", rep.witnesses_found, rep.trials);
      return kOk;
    }

    if (*propsuite) {
      manifest.command = "propsuite";
      manifest.config = {{"seed", seed}};
      checks::SuiteReport rep = checks::run_property_suite(seed);
      emit(out_path, rep.to_json(), manifest);
      int failed = 0;
      for (const auto& r : rep.results)
        if (!r.passed) {
          ++failed;
          fmt::print("FAIL {}/{}\n", r.module, r.name);
        }
      fmt::print("{} of {} properties hold\n", rep.results.size() - failed, rep.results.size());
      return rep.all_passed() ? kOk : kPropertyViolation;
    }
  } catch (const BoundaryError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBoundaryError;
  } catch (const StructuralError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const InputError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const InadmissibleError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInadmissible;
  } catch (const SolverError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  }
  return kOk;
}

}  // namespace hypflow::cli
