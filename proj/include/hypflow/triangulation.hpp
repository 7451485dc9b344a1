#pragma once

#include <array>
#include <compare>
#include <functional>
#include <string>
#include <vector>

namespace hypflow {

// Local labelling of a tetrahedron. Vertices are 0..3, face f is the face
// opposite vertex f, and edges 0..5 are the vertex pairs 01 02 03 12 13 23.
// Edge e and edge 5 - e are opposite.
inline constexpr std::array<std::array<int, 2>, 6> kEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Index of the edge joining local vertices v != w.
constexpr int edge_index(int v, int w) {
  if (v > w) std::swap(v, w);
  constexpr int base[3] = {0, 3, 5};
  return base[v] + (w - v - 1);
}

// Three edges meeting at vertex v, in increasing index order.
constexpr std::array<int, 3> edges_at_vertex(int v) {
  std::array<int, 3> out{};
  int k = 0;
  for (int e = 0; e < 6; ++e)
    if (kEdgeVertices[e][0] == v || kEdgeVertices[e][1] == v) out[k++] = e;
  return out;
}

using Perm = std::array<int, 4>;

struct FacePairing {
  int target_tet = -1;
  int target_face = -1;
  Perm perm{0, 1, 2, 3};  // image list: local vertex v -> perm[v] in target

  friend bool operator==(const FacePairing&, const FacePairing&) = default;
  friend auto operator<=>(const FacePairing&, const FacePairing&) = default;
};

// Raw gluing data: pairings[4 * t + f] describes where face f of tet t goes.
struct GluingSpec {
  int tet_count = 0;
  std::vector<FacePairing> pairings;

  const FacePairing& at(int tet, int face) const { return pairings[4 * tet + face]; }
  FacePairing& at(int tet, int face) { return pairings[4 * tet + face]; }

  friend bool operator==(const GluingSpec&, const GluingSpec&) = default;
  friend auto operator<=>(const GluingSpec&, const GluingSpec&) = default;
};

struct Corner {
  int tet = 0;
  int edge = 0;
  friend bool operator==(const Corner&, const Corner&) = default;
  friend auto operator<=>(const Corner&, const Corner&) = default;
};

struct EdgeClass {
  int id = 0;
  std::vector<Corner> corners;  // sorted
  int valence() const { return static_cast<int>(corners.size()); }
};

struct VertexCorner {
  int tet = 0;
  int vertex = 0;
  friend bool operator==(const VertexCorner&, const VertexCorner&) = default;
  friend auto operator<=>(const VertexCorner&, const VertexCorner&) = default;
};

struct VertexClass {
  int id = 0;
  std::vector<VertexCorner> corners;  // sorted; one truncation triangle each
  int link_vertices = 0;              // edge-class ends arriving here
  int link_euler = 0;
};

// Ideal (truncated) triangulation with derived edge and vertex classes.
// Immutable after construction.
class Triangulation {
 public:
  // Validates structure and the negative-Euler-characteristic boundary
  // hypothesis. Throws StructuralError or BoundaryError.
  static Triangulation build(GluingSpec spec);

  // Structural validation only; boundary links may have any Euler
  // characteristic. Used by the gluing search and by diagnostics.
  static Triangulation analyze(GluingSpec spec);

  const GluingSpec& spec() const { return spec_; }
  int tet_count() const { return spec_.tet_count; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<EdgeClass>& edge_classes() const { return edges_; }
  const std::vector<VertexClass>& vertex_classes() const { return vertices_; }

  int edge_class_of(int tet, int edge) const { return edge_of_corner_[6 * tet + edge]; }
  int vertex_class_of(int tet, int vertex) const { return vertex_of_corner_[4 * tet + vertex]; }
  // Edge-class index of each local edge of tet, in local order.
  std::array<int, 6> tet_edge_classes(int tet) const;

  // Tetrahedron orientation signs (+1/-1) witnessing orientability.
  const std::vector<int>& orientation() const { return orientation_; }

  bool boundary_hyperbolic() const;
  int boundary_euler() const;

 private:
  Triangulation() = default;

  enum class Failure { none, structural, boundary };
  struct Analysis {
    Failure failure = Failure::none;
    std::string message;
  };
  Analysis derive();

  GluingSpec spec_;
  std::vector<EdgeClass> edges_;
  std::vector<VertexClass> vertices_;
  std::vector<int> edge_of_corner_;
  std::vector<int> vertex_of_corner_;
  std::vector<int> orientation_;
};

using GluingPredicate = std::function<bool(const Triangulation&)>;

// Exhaustive search over closed orientable gluings of tet_count (1 or 2)
// tetrahedra. Results are reduced up to relabelling; each class is
// represented by its lexicographically smallest spec, and the list is sorted.
std::vector<GluingSpec> search_gluings(int tet_count, const GluingPredicate& predicate);

// Predicate used for the canonical test instance: a single edge class and
// every boundary link of negative Euler characteristic.
bool one_edge_hyperbolic_boundary(const Triangulation& tri);

// First result of search_gluings(2, one_edge_hyperbolic_boundary).
const GluingSpec& census_two_tet();

}  // namespace hypflow
