#include "hypflow/io.hpp"

#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "hypflow/errors.hpp"

namespace hypflow::io {

json gluing_to_json(const GluingSpec& spec) {
  json pairings = json::array();
  for (int t = 0; t < spec.tet_count; ++t)
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      pairings.push_back({t, f, p.target_tet, p.target_face,
                          {p.perm[0], p.perm[1], p.perm[2], p.perm[3]}});
    }
  return {{"tet_count", spec.tet_count}, {"pairings", pairings}};
}

GluingSpec gluing_from_json(const json& doc) {
  try {
    GluingSpec spec;
    spec.tet_count = doc.at("tet_count").get<int>();
    if (spec.tet_count < 1) throw StructuralError("tet_count must be positive");
    const json& list = doc.at("pairings");
    if (!list.is_array()) throw InputError("pairings must be an array");
    if (static_cast<int>(list.size()) != 4 * spec.tet_count)
      throw StructuralError(fmt::format("expected {} pairings, found {}", 4 * spec.tet_count, list.size()));
    spec.pairings.assign(4 * spec.tet_count, FacePairing{});
    std::vector<bool> seen(4 * spec.tet_count, false);
    for (const json& entry : list) {
      if (!entry.is_array() || entry.size() != 5) throw InputError("each pairing must be [t, f, t2, f2, perm]");
      int t = entry[0].get<int>(), f = entry[1].get<int>();
      if (t < 0 || t >= spec.tet_count || f < 0 || f > 3)
        throw StructuralError(fmt::format("pairing names nonexistent face ({}, {})", t, f));
      if (seen[4 * t + f]) throw StructuralError(fmt::format("face ({}, {}) is listed twice", t, f));
      seen[4 * t + f] = true;
      FacePairing p;
      p.target_tet = entry[2].get<int>();
      p.target_face = entry[3].get<int>();
      const json& perm = entry[4];
      if (!perm.is_array() || perm.size() != 4) throw InputError("permutation must list four images");
      for (int k = 0; k < 4; ++k) p.perm[k] = perm[k].get<int>();
      spec.at(t, f) = p;
    }
    return spec;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed triangulation JSON: ") + e.what());
  }
}

json edge_report(const Triangulation& tri) {
  json edges = json::array();
  for (const EdgeClass& ec : tri.edge_classes()) {
    json corners = json::array();
    for (const Corner& c : ec.corners) corners.push_back({c.tet, c.edge});
    edges.push_back({{"id", ec.id}, {"valence", ec.valence()}, {"corners", corners}});
  }
  json vertices = json::array();
  for (const VertexClass& vc : tri.vertex_classes()) {
    json corners = json::array();
    for (const VertexCorner& c : vc.corners) corners.push_back({c.tet, c.vertex});
    vertices.push_back({{"id", vc.id}, {"corners", corners}, {"link_euler", vc.link_euler}});
  }
  return {{"edges", edges}, {"vertices", vertices}, {"boundary_euler", tri.boundary_euler()}};
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json vec6_to_json(const tetgeom::Vec6& v) { return vector_to_json(Eigen::VectorXd(v)); }

json metric_to_json(const Eigen::VectorXd& lengths) { return {{"lengths", vector_to_json(lengths)}}; }

Eigen::VectorXd metric_from_json(const json& doc) {
  try {
    const json& list = doc.at("lengths");
    if (!list.is_array()) throw InputError("lengths must be an array");
    Eigen::VectorXd x(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) x[i] = list[i].get<double>();
    return x;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed metric JSON: ") + e.what());
  }
}

json assignment_to_json(const AngleAssignment& assign) {
  json rows = json::array();
  for (const tetgeom::Vec6& a : assign.angles) rows.push_back(vec6_to_json(a));
  return {{"angles", rows}};
}

AngleAssignment assignment_from_json(const json& doc) {
  try {
    AngleAssignment out;
    for (const json& row : doc.at("angles")) {
      if (!row.is_array() || row.size() != 6) throw InputError("each tetrahedron needs six angles");
      tetgeom::Vec6 a;
      for (int e = 0; e < 6; ++e) a[e] = row[e].get<double>();
      out.angles.push_back(a);
    }
    return out;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed angle JSON: ") + e.what());
  }
}

json lp_to_json(const LPResult& result) {
  json out{{"feasible", result.feasible}, {"epsilon", result.epsilon}, {"pivots", result.pivots}};
  out["witness"] = result.witness.angles.empty() ? json(nullptr) : assignment_to_json(result.witness);
  return out;
}

json curvature_report(const CurvatureState& state) {
  Eigen::VectorXd eigs;
  if (state.J.size()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (state.J + state.J.transpose()),
                                                      Eigen::EigenvaluesOnly);
    eigs = es.eigenvalues();
  }
  return {{"K", vector_to_json(state.K)},
          {"S", vector_to_json(state.S)},
          {"H", state.H},
          {"J_eigs", vector_to_json(eigs)}};
}

json shape_to_json(const tetgeom::TetShape& shape) {
  json arcs = json::array();
  for (double a : shape.arcs.flat()) arcs.push_back(a);
  auto matrix = [](const tetgeom::Mat6& m) {
    json rows = json::array();
    for (int i = 0; i < 6; ++i) rows.push_back(vector_to_json(Eigen::VectorXd(m.row(i).transpose())));
    return rows;
  };
  return {{"lengths", vec6_to_json(shape.lengths)},
          {"arcs", arcs},
          {"angles", vec6_to_json(shape.angles)},
          {"jac_ax", matrix(shape.jac_ax)},
          {"jac_xa", matrix(shape.jac_xa)}};
}

json convexity_to_json(const tetgeom::ConvexityReport& report) {
  json witnesses = json::array();
  for (const auto& w : report.witnesses)
    witnesses.push_back({{"first", vec6_to_json(w.first)},
                         {"second", vec6_to_json(w.second)},
                         {"midpoint", vec6_to_json(w.midpoint)},
                         {"reason", w.reason}});
  return {{"seed", report.seed},
          {"trials", report.trials},
          {"witnesses_found", report.witnesses_found},
          {"witnesses", witnesses}};
}

std::string trace_csv(const FlowTrace& trace) {
  std::string out = "t";
  const Eigen::Index n = trace.samples.empty() ? 0 : trace.samples.front().x.size();
  for (Eigen::Index i = 0; i < n; ++i) out += fmt::format(",x_{}", i);
  for (Eigen::Index i = 0; i < n; ++i) out += fmt::format(",K_{}", i);
  out += ",total_curv,H\n";
  for (const FlowSample& s : trace.samples) {
    out += fmt::format("{:.17g}", s.t);
    for (Eigen::Index i = 0; i < n; ++i) out += fmt::format(",{:.17g}", s.x[i]);
    for (Eigen::Index i = 0; i < n; ++i) out += fmt::format(",{:.17g}", s.K[i]);
    out += fmt::format(",{:.17g},{:.17g}\n", s.total_curv, s.H);
  }
  return out;
}

json trace_status(const FlowTrace& trace) {
  json out{{"status", to_string(trace.status)},
           {"witness", trace.witness},
           {"accepted_steps", trace.accepted_steps},
           {"rejected_steps", trace.rejected_steps},
           {"samples", trace.samples.size()}};
  if (!trace.samples.empty()) {
    const FlowSample& last = trace.samples.back();
    out["final"] = {{"t", last.t},
                    {"x", vector_to_json(last.x)},
                    {"K", vector_to_json(last.K)},
                    {"total_curv", last.total_curv},
                    {"H", last.H}};
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", path, e.what()));
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_json_file(const std::string& path, const json& doc) { write_text_file(path, dump(doc)); }

}  // namespace hypflow::io
