#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hypflow/errors.hpp"
#include "hypflow/metric.hpp"

namespace hypflow {

enum class FlowMethod { rk4_fixed, rkf45_adaptive };

struct FlowConfig {
  double t_max = 200.0;
  double initial_step = 0.01;
  double curvature_tol = 1e-12;      // stop once ||K||_inf falls below
  double degeneration_margin = 1e-7;
  FlowMethod method = FlowMethod::rkf45_adaptive;
  double rel_tol = 1e-9;             // rkf45 local error control
  double abs_tol = 1e-11;
  std::uint64_t seed = 0;            // perturbation experiments only
  long max_steps = 1000000;

  // Throws std::invalid_argument on non-positive fields or a curvature
  // tolerance below 1e-13.
  void validate() const;
};

enum class FlowStatus { converged, degenerated, t_max_reached };

struct FlowSample {
  double t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd K;
  double total_curv = 0;  // sum of K_i^2
  double H = 0;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  FlowStatus status = FlowStatus::t_max_reached;
  std::string witness;  // degeneration description, empty otherwise
  long accepted_steps = 0;
  long rejected_steps = 0;
};

// Adaptive stepping could not make progress; carries everything integrated
// so far.
class StepUnderflowError : public SolverError {
 public:
  StepUnderflowError(const std::string& what, FlowTrace partial)
      : SolverError(what), trace_(std::move(partial)) {}
  const FlowTrace& trace() const { return trace_; }

 private:
  FlowTrace trace_;
};

// Integrates dx/dt = K(x) from m0.
FlowTrace flow(const ConeMetric& m0, const FlowConfig& cfg = {});

struct MinimizeReport {
  bool converged = false;
  int iterations = 0;
  double final_curvature = 0;          // ||K||_inf at the returned metric
  std::vector<double> curvature_history;
  std::vector<double> step_lengths;    // accepted line-search fractions
};

struct MinimizeResult {
  ConeMetric metric;
  MinimizeReport report;
};

// Newton's method on the energy: (-J) d = K solved by Cholesky, with a
// backtracking line search on the energy. Throws SolverError when -J fails
// to factor or the line search cannot stay inside the admissible set.
MinimizeResult minimize_energy(const ConeMetric& m0, double tol, int max_iterations = 100);

struct AttractorReport {
  std::uint64_t seed = 0;
  double radius = 0;
  int trials = 0;
  int recovered = 0;
  double recovery_fraction = 0;
  double worst_distance = 0;
  std::vector<double> distances;  // per trial, ||x_final - x_eq||_inf
};

// Perturbs an equilibrium and checks that the flow returns to it.
AttractorReport attractor_experiment(const ConeMetric& equilibrium, double radius, int trials,
                                     std::uint64_t seed, const FlowConfig& cfg = {});

struct RigidityReport {
  Eigen::VectorXd singular_values;  // descending
  Eigen::VectorXd eigenvalues;      // of J, ascending
  double smallest_singular = 0;
  double largest_singular = 0;
  double condition_number = 0;
  bool nonsingular = false;  // smallest > 1e-12 * largest
};

RigidityReport rigidity_probe(const ConeMetric& m);

std::string to_string(FlowStatus status);
std::string to_string(FlowMethod method);
FlowMethod parse_flow_method(const std::string& name);

}  // namespace hypflow
