#include "hypflow/metric.hpp"

#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hypflow/errors.hpp"

namespace hypflow {

using tetgeom::Vec6;

ConeMetric::ConeMetric(const Triangulation& tri, Eigen::VectorXd lengths)
    : tri_(&tri), x_(std::move(lengths)) {
  if (x_.size() != tri.edge_count())
    throw std::invalid_argument(fmt::format("metric has {} lengths but the triangulation has {} edge classes",
                                            x_.size(), tri.edge_count()));
}

Vec6 ConeMetric::tet_lengths(int tet) const {
  Vec6 out;
  for (int e = 0; e < 6; ++e) out[e] = x_[tri_->edge_class_of(tet, e)];
  return out;
}

MetricMargin metric_margin(const ConeMetric& m) {
  MetricMargin out;
  out.admissible = true;
  out.cosine_margin = 1.0;
  out.vertex_slack = std::numbers::pi;
  if ((m.lengths().array() <= 0).any() || !m.lengths().allFinite()) {
    out.admissible = false;
    out.cosine_margin = -1;
    out.reason = "non-positive length";
    return out;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.triangulation().tet_count(); ++t) {
    tetgeom::AngleEvaluation ev = tetgeom::evaluate_angles(m.tet_lengths(t));
    out.cosine_margin = std::min(out.cosine_margin, ev.cosine_margin);
    out.vertex_slack = std::min(out.vertex_slack, ev.vertex_slack);
    if (!ev.admissible && out.admissible) {
      out.admissible = false;
      out.reason = ev.reason;
      out.tet = t;
      out.vertex = ev.vertex;
      out.edge = ev.edge;
    }
    double here = std::min(ev.cosine_margin, ev.vertex_slack);
    if (out.admissible && here < worst) {
      worst = here;
      out.tet = t;
    }
  }
  return out;
}

bool is_admissible(const ConeMetric& m) { return metric_margin(m).admissible; }

std::vector<Vec6> tet_angles(const ConeMetric& m) {
  std::vector<Vec6> out;
  out.reserve(m.triangulation().tet_count());
  for (int t = 0; t < m.triangulation().tet_count(); ++t) {
    tetgeom::AngleEvaluation ev = tetgeom::evaluate_angles(m.tet_lengths(t));
    if (!ev.admissible)
      throw InadmissibleError(fmt::format("tetrahedron {} is inadmissible: {}", t, ev.reason), t);
    out.push_back(ev.angles);
  }
  return out;
}

CurvatureState curvature(const ConeMetric& m) {
  const Triangulation& tri = m.triangulation();
  CurvatureState st;
  st.S = Eigen::VectorXd::Zero(tri.edge_count());
  std::vector<Vec6> angles = tet_angles(m);
  for (int t = 0; t < tri.tet_count(); ++t)
    for (int e = 0; e < 6; ++e) st.S[tri.edge_class_of(t, e)] += angles[t][e];
  st.K = (2 * std::numbers::pi - st.S.array()).matrix();
  return st;
}

Eigen::MatrixXd curvature_jacobian(const ConeMetric& m) {
  const Triangulation& tri = m.triangulation();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(tri.edge_count(), tri.edge_count());
  for (int t = 0; t < tri.tet_count(); ++t) {
    Vec6 x = m.tet_lengths(t);
    if (!tetgeom::evaluate_angles(x).admissible)
      throw InadmissibleError(fmt::format("tetrahedron {} is inadmissible", t), t);
    tetgeom::Mat6 block = tetgeom::jacobian_a_wrt_x(x);
    auto cls = tri.tet_edge_classes(t);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) jac(cls[i], cls[j]) -= block(i, j);
  }
  return jac;
}

Energy energy(const ConeMetric& m) {
  const Triangulation& tri = m.triangulation();
  CurvatureState st = curvature(m);
  double volume = 0;
  for (int t = 0; t < tri.tet_count(); ++t) volume += tetgeom::schlafli_potential(m.tet_lengths(t));
  return {2 * volume - st.K.dot(m.lengths()), -st.K};
}

CurvatureState evaluate(const ConeMetric& m) {
  CurvatureState st = curvature(m);
  st.J = curvature_jacobian(m);
  Energy en = energy(m);
  st.H = en.value;
  st.H_grad = en.grad;
  return st;
}

}  // namespace hypflow
