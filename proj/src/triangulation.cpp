#include "hypflow/triangulation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "hypflow/errors.hpp"

namespace hypflow {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

int parity(const Perm& p) {
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

Perm inverse(const Perm& p) {
  Perm q{};
  for (int i = 0; i < 4; ++i) q[p[i]] = i;
  return q;
}

bool is_permutation(const Perm& p) {
  std::array<bool, 4> seen{};
  for (int v : p) {
    if (v < 0 || v > 3 || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace

Triangulation::Analysis Triangulation::derive() {
  const GluingSpec& spec = spec_;
  auto& edges = edges_;
  auto& vertices = vertices_;
  auto& edge_of_corner = edge_of_corner_;
  auto& vertex_of_corner = vertex_of_corner_;
  auto& orientation = orientation_;
  const int n = spec.tet_count;
  auto fail = [](std::string msg) { return Analysis{Failure::structural, std::move(msg)}; };

  if (n < 1) return fail("tet_count must be positive");
  if (static_cast<int>(spec.pairings.size()) != 4 * n)
    return fail(fmt::format("expected {} face pairings, found {}", 4 * n, spec.pairings.size()));

  for (int t = 0; t < n; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      if (p.target_tet < 0 || p.target_tet >= n || p.target_face < 0 || p.target_face > 3)
        return fail(fmt::format("face ({}, {}) is unpaired or points outside the triangulation", t, f));
      if (!is_permutation(p.perm))
        return fail(fmt::format("face ({}, {}) carries an invalid permutation", t, f));
      if (p.perm[f] != p.target_face)
        return fail(fmt::format("face ({}, {}): permutation does not send face {} to face {}", t, f,
                                f, p.target_face));
      if (p.target_tet == t && p.target_face == f)
        return fail(fmt::format("face ({}, {}) is paired with itself", t, f));
      const FacePairing& back = spec.at(p.target_tet, p.target_face);
      if (back.target_tet != t || back.target_face != f || back.perm != inverse(p.perm))
        return fail(fmt::format("pairing of face ({}, {}) is not involutive", t, f));
    }
  }

  // Orientability: 2-colour tetrahedra so every gluing reverses orientation.
  orientation.assign(n, 0);
  orientation[0] = 1;
  std::vector<int> stack{0};
  int reached = 1;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      int want = -orientation[t] * parity(p.perm);
      int& have = orientation[p.target_tet];
      if (have == 0) {
        have = want;
        ++reached;
        stack.push_back(p.target_tet);
      } else if (have != want) {
        return fail("gluing is not orientable");
      }
    }
  }
  if (reached != n) return fail("gluing is disconnected");

  // Directed edge ends: slot 12 t + 2 e + s is the end of local edge e at
  // kEdgeVertices[e][s]. Undirected classes follow by forgetting s.
  DisjointSets ends(12 * n);
  DisjointSets verts(4 * n);
  for (int t = 0; t < n; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      for (int v = 0; v < 4; ++v)
        if (v != f) verts.unite(4 * t + v, 4 * p.target_tet + p.perm[v]);
      for (int e = 0; e < 6; ++e) {
        auto [a, b] = kEdgeVertices[e];
        if (a == f || b == f) continue;
        int ia = p.perm[a], ib = p.perm[b];
        int e2 = edge_index(ia, ib);
        int s2 = kEdgeVertices[e2][0] == ia ? 0 : 1;
        ends.unite(12 * t + 2 * e, 12 * p.target_tet + 2 * e2 + s2);
        ends.unite(12 * t + 2 * e + 1, 12 * p.target_tet + 2 * e2 + (1 - s2));
      }
    }
  }
  for (int c = 0; c < 6 * n; ++c)
    if (ends.find(2 * c) == ends.find(2 * c + 1))
      return fail(fmt::format("edge of corner ({}, {}) is identified with itself in reverse", c / 6,
                              c % 6));

  // Edge classes, ordered by smallest corner (root of the directed end 0
  // orbit is not enough since the orbit also contains s = 1 slots).
  {
    std::map<int, std::vector<Corner>> orbits;
    for (int t = 0; t < n; ++t)
      for (int e = 0; e < 6; ++e) {
        int r = std::min(ends.find(12 * t + 2 * e), ends.find(12 * t + 2 * e + 1));
        orbits[r].push_back({t, e});
      }
    edges.clear();
    for (auto& [root, corners] : orbits) {
      std::sort(corners.begin(), corners.end());
      edges.push_back({0, std::move(corners)});
    }
    std::sort(edges.begin(), edges.end(),
              [](const EdgeClass& l, const EdgeClass& r) { return l.corners[0] < r.corners[0]; });
    edge_of_corner.assign(6 * n, -1);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i].id = static_cast<int>(i);
      for (const Corner& c : edges[i].corners) edge_of_corner[6 * c.tet + c.edge] = static_cast<int>(i);
    }
  }

  {
    std::map<int, std::vector<VertexCorner>> orbits;
    for (int t = 0; t < n; ++t)
      for (int v = 0; v < 4; ++v) orbits[verts.find(4 * t + v)].push_back({t, v});
    vertices.clear();
    for (auto& [root, corners] : orbits) {
      std::sort(corners.begin(), corners.end());
      vertices.push_back({0, std::move(corners), 0, 0});
    }
    std::sort(vertices.begin(), vertices.end(), [](const VertexClass& l, const VertexClass& r) {
      return l.corners[0] < r.corners[0];
    });
    vertex_of_corner.assign(4 * n, -1);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      vertices[i].id = static_cast<int>(i);
      for (const VertexCorner& c : vertices[i].corners)
        vertex_of_corner[4 * c.tet + c.vertex] = static_cast<int>(i);
    }
  }

  // Link Euler characteristic: V - E + F with F truncation triangles,
  // E = 3F/2 identified sides, V = edge-class ends landing at the vertex.
  std::vector<bool> counted(12 * n, false);
  for (int t = 0; t < n; ++t)
    for (int e = 0; e < 6; ++e)
      for (int s = 0; s < 2; ++s) {
        int root = ends.find(12 * t + 2 * e + s);
        if (counted[root]) continue;
        counted[root] = true;
        vertices[vertex_of_corner[4 * t + kEdgeVertices[e][s]]].link_vertices++;
      }
  for (VertexClass& vc : vertices) {
    int faces = vc.corners.size();
    vc.link_euler = vc.link_vertices - 3 * faces / 2 + faces;
  }

  for (const VertexClass& vc : vertices)
    if (vc.link_euler >= 0)
      return {Failure::boundary,
              fmt::format("boundary Euler characteristic >= 0 at vertex class {} (chi = {})", vc.id,
                          vc.link_euler)};
  return {};
}

Triangulation Triangulation::build(GluingSpec spec) {
  Triangulation tri;
  tri.spec_ = std::move(spec);
  Analysis a = tri.derive();
  if (a.failure == Failure::structural) throw StructuralError(a.message);
  if (a.failure == Failure::boundary) throw BoundaryError(a.message);
  return tri;
}

Triangulation Triangulation::analyze(GluingSpec spec) {
  Triangulation tri;
  tri.spec_ = std::move(spec);
  Analysis a = tri.derive();
  if (a.failure == Failure::structural) throw StructuralError(a.message);
  return tri;
}

std::array<int, 6> Triangulation::tet_edge_classes(int tet) const {
  std::array<int, 6> out{};
  for (int e = 0; e < 6; ++e) out[e] = edge_of_corner_[6 * tet + e];
  return out;
}

bool Triangulation::boundary_hyperbolic() const {
  return std::all_of(vertices_.begin(), vertices_.end(),
                     [](const VertexClass& v) { return v.link_euler < 0; });
}

int Triangulation::boundary_euler() const {
  int chi = 0;
  for (const VertexClass& v : vertices_) chi += v.link_euler;
  return chi;
}

namespace {

std::vector<Perm> all_perms() {
  std::vector<Perm> out;
  Perm p{0, 1, 2, 3};
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Applies tet relabelling tet_map and per-tet vertex relabellings.
GluingSpec relabel(const GluingSpec& spec, const std::vector<int>& tet_map,
                   const std::vector<Perm>& vertex_maps) {
  GluingSpec out{spec.tet_count, std::vector<FacePairing>(spec.pairings.size())};
  for (int t = 0; t < spec.tet_count; ++t) {
    const Perm& rho = vertex_maps[t];
    for (int f = 0; f < 4; ++f) {
      const FacePairing& p = spec.at(t, f);
      const Perm& rho2 = vertex_maps[p.target_tet];
      FacePairing q;
      q.target_tet = tet_map[p.target_tet];
      q.target_face = rho2[p.target_face];
      for (int v = 0; v < 4; ++v) q.perm[rho[v]] = rho2[p.perm[v]];
      out.at(tet_map[t], rho[f]) = q;
    }
  }
  return out;
}

GluingSpec canonical_form(const GluingSpec& spec, const std::vector<Perm>& perms) {
  std::vector<int> tet_map(spec.tet_count);
  std::iota(tet_map.begin(), tet_map.end(), 0);
  std::optional<GluingSpec> best;
  do {
    std::vector<std::size_t> idx(spec.tet_count, 0);
    while (true) {
      std::vector<Perm> maps(spec.tet_count);
      for (int t = 0; t < spec.tet_count; ++t) maps[t] = perms[idx[t]];
      GluingSpec candidate = relabel(spec, tet_map, maps);
      if (!best || candidate < *best) best = std::move(candidate);
      int k = 0;
      while (k < spec.tet_count && ++idx[k] == perms.size()) idx[k++] = 0;
      if (k == spec.tet_count) break;
    }
  } while (std::next_permutation(tet_map.begin(), tet_map.end()));
  return *best;
}

// Enumerates perfect matchings of faces with gluing permutations, in a fixed
// lexicographic order, invoking visit on each complete spec.
void enumerate(GluingSpec& spec, std::vector<bool>& used, const std::vector<Perm>& perms,
               const std::function<void(const GluingSpec&)>& visit) {
  const int faces = 4 * spec.tet_count;
  int first = 0;
  while (first < faces && used[first]) ++first;
  if (first == faces) {
    visit(spec);
    return;
  }
  used[first] = true;
  const int t = first / 4, f = first % 4;
  for (int other = first + 1; other < faces; ++other) {
    if (used[other]) continue;
    used[other] = true;
    const int t2 = other / 4, f2 = other % 4;
    for (const Perm& p : perms) {
      if (p[f] != f2) continue;
      spec.at(t, f) = {t2, f2, p};
      spec.at(t2, f2) = {t, f, inverse(p)};
      enumerate(spec, used, perms, visit);
    }
    used[other] = false;
  }
  used[first] = false;
}

}  // namespace

std::vector<GluingSpec> search_gluings(int tet_count, const GluingPredicate& predicate) {
  if (tet_count < 1 || tet_count > 2) throw std::invalid_argument("search_gluings: tet_count must be 1 or 2");
  const std::vector<Perm> perms = all_perms();
  GluingSpec spec{tet_count, std::vector<FacePairing>(4 * tet_count)};
  std::vector<bool> used(4 * tet_count, false);
  std::vector<GluingSpec> found;

  enumerate(spec, used, perms, [&](const GluingSpec& s) {
    std::optional<Triangulation> tri;
    try {
      tri.emplace(Triangulation::analyze(s));
    } catch (const StructuralError&) {
      return;
    }
    if (predicate(*tri)) found.push_back(canonical_form(s, perms));
  });
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

bool one_edge_hyperbolic_boundary(const Triangulation& tri) {
  return tri.edge_count() == 1 && tri.boundary_hyperbolic();
}

const GluingSpec& census_two_tet() {
  static const GluingSpec spec = [] {
    auto all = search_gluings(2, one_edge_hyperbolic_boundary);
    if (all.empty()) throw std::logic_error("census search returned no gluings");
    return all.front();
  }();
  return spec;
}

}  // namespace hypflow
