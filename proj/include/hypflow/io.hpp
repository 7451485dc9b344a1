#pragma once

#include <string>

#include <Eigen/Core>
#include "json.hpp"

#include "hypflow/angles.hpp"
#include "hypflow/dynamics.hpp"
#include "hypflow/metric.hpp"
#include "hypflow/tetgeom.hpp"
#include "hypflow/triangulation.hpp"

namespace hypflow::io {

using nlohmann::json;

// {"tet_count": N, "pairings": [[t, f, t2, f2, [s0, s1, s2, s3]], ...]}
json gluing_to_json(const GluingSpec& spec);
// Throws InputError on malformed documents and StructuralError when a face
// is missing or listed twice.
GluingSpec gluing_from_json(const json& doc);

// {"edges": [{"id", "valence", "corners": [[t, e], ...]}], "vertices": [...]}
json edge_report(const Triangulation& tri);

// {"lengths": [...]}
json metric_to_json(const Eigen::VectorXd& lengths);
Eigen::VectorXd metric_from_json(const json& doc);

// {"angles": [[a_t0e0, ..., a_t0e5], ...]}
json assignment_to_json(const AngleAssignment& assign);
AngleAssignment assignment_from_json(const json& doc);

json lp_to_json(const LPResult& result);

// {"K": [...], "S": [...], "H": v, "J_eigs": [...]}
json curvature_report(const CurvatureState& state);

json shape_to_json(const tetgeom::TetShape& shape);
json convexity_to_json(const tetgeom::ConvexityReport& report);
json vector_to_json(const Eigen::VectorXd& v);
json vec6_to_json(const tetgeom::Vec6& v);

// Header t,x_0..x_{n-1},K_0..K_{n-1},total_curv,H; 17 significant digits.
std::string trace_csv(const FlowTrace& trace);
json trace_status(const FlowTrace& trace);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const json& doc);
std::string dump(const json& doc);

}  // namespace hypflow::io
