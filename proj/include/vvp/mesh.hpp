// Conforming triangle meshes: structured generators for the four benchmark
// domains, red (uniform) refinement, and adaptive newest-vertex bisection.
#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvp/geometry.hpp"

namespace vvp {

enum class Domain { unit_square, unit_triangle, l_shape, t_shape };

inline const char* domain_name(Domain d) {
  switch (d) {
    case Domain::unit_square: return "unit_square";
    case Domain::unit_triangle: return "unit_triangle";
    case Domain::l_shape: return "l_shape";
    case Domain::t_shape: return "t_shape";
  }
  return "?";
}

inline Domain domain_from_name(const std::string& s) {
  if (s == "unit_square") return Domain::unit_square;
  if (s == "unit_triangle") return Domain::unit_triangle;
  if (s == "l_shape") return Domain::l_shape;
  if (s == "t_shape") return Domain::t_shape;
  throw std::invalid_argument("unknown domain: " + s);
}

/// Triangle given by three CCW vertex ids plus the local index of its
/// refinement edge.  Local edge i is the edge opposite vertex i, i.e. it
/// connects v[(i+1)%3] and v[(i+2)%3].
struct Cell {
  std::array<int, 3> v{};
  int refedge = 0;
};

/// Undirected edge; cell1 == -1 on the boundary.  cell0 is the cell that
/// first registered the edge (lowest cell id), which fixes the normal
/// orientation used by the DG terms: normals point from cell0 into cell1.
struct Edge {
  int v0 = 0, v1 = 0;
  int cell0 = -1, cell1 = -1;
  bool boundary = false;
};

class Mesh {
 public:
  Domain domain = Domain::unit_square;
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Edge> edges;
  /// cell_edges[c][i] = id of the edge opposite local vertex i of cell c.
  std::vector<std::array<int, 3>> cell_edges;
  std::vector<bool> boundary_vertex;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  std::array<Vec2, 3> cell_points(int c) const {
    const auto& cv = cells[c].v;
    return {vertices[cv[0]], vertices[cv[1]], vertices[cv[2]]};
  }

  double cell_area(int c) const {
    const auto p = cell_points(c);
    return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
  }

  Vec2 cell_centroid(int c) const {
    const auto p = cell_points(c);
    return (p[0] + p[1] + p[2]) / 3.0;
  }

  /// Diameter of a triangle = its longest edge.
  double cell_diameter(int c) const {
    const auto p = cell_points(c);
    double m = 0.0;
    for (int i = 0; i < 3; ++i) m = std::max(m, dot(p[(i + 1) % 3] - p[(i + 2) % 3], p[(i + 1) % 3] - p[(i + 2) % 3]));
    return std::sqrt(m);
  }

  double edge_length(int e) const { return norm(vertices[edges[e].v1] - vertices[edges[e].v0]); }

  Vec2 edge_midpoint(int e) const { return (vertices[edges[e].v0] + vertices[edges[e].v1]) * 0.5; }

  /// Unit normal pointing out of edges[e].cell0 (outward on the boundary).
  Vec2 edge_normal(int e) const {
    const Edge& ed = edges[e];
    Vec2 t = vertices[ed.v1] - vertices[ed.v0];
    Vec2 n = Vec2{t.y, -t.x} / norm(t);
    if (dot(n, cell_centroid(ed.cell0) - edge_midpoint(e)) > 0.0) n = -n;
    return n;
  }

  /// Rebuild edge connectivity and boundary flags from the cell list.
  void finalize() {
    edges.clear();
    cell_edges.assign(cells.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, int> edge_of;
    for (int c = 0; c < n_cells(); ++c) {
      for (int i = 0; i < 3; ++i) {
        int a = cells[c].v[(i + 1) % 3], b = cells[c].v[(i + 2) % 3];
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = edge_of.find(key);
        if (it == edge_of.end()) {
          Edge e;
          e.v0 = a;
          e.v1 = b;
          e.cell0 = c;
          edge_of.emplace(key, n_edges());
          cell_edges[c][i] = n_edges();
          edges.push_back(e);
        } else {
          Edge& e = edges[it->second];
          if (e.cell1 != -1) throw std::runtime_error("mesh: edge shared by more than two cells");
          e.cell1 = c;
          cell_edges[c][i] = it->second;
        }
      }
    }
    boundary_vertex.assign(vertices.size(), false);
    for (Edge& e : edges) {
      e.boundary = (e.cell1 == -1);
      if (e.boundary) boundary_vertex[e.v0] = boundary_vertex[e.v1] = true;
    }
    for (int c = 0; c < n_cells(); ++c)
      if (cell_area(c) <= 0.0) throw std::runtime_error("mesh: cell with non-positive area");
  }

  /// Assign every refinement edge to the longest edge (ties: lowest local index).
  void init_refinement_edges() {
    for (auto& cell : cells) {
      const Vec2 p[3] = {vertices[cell.v[0]], vertices[cell.v[1]], vertices[cell.v[2]]};
      double best = -1.0;
      for (int i = 0; i < 3; ++i) {
        const Vec2 d = p[(i + 1) % 3] - p[(i + 2) % 3];
        const double l2 = dot(d, d);
        if (l2 > best) {
          best = l2;
          cell.refedge = i;
        }
      }
    }
  }
};

/// Largest cell diameter.
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) h = std::max(h, mesh.cell_diameter(c));
  return h;
}

namespace detail {

/// Triangulate a union of axis-aligned unit squares (lower-left corners given
/// on an integer lattice), each subdivided into a g x g grid of squares split
/// along the lower-left/upper-right diagonal.  Vertices are deduplicated on
/// the global integer lattice at resolution 1/g.
inline Mesh square_union_mesh(const std::vector<std::pair<int, int>>& squares, int g, Vec2 offset) {
  Mesh mesh;
  std::map<std::pair<long, long>, int> vid;
  auto vertex = [&](long gx, long gy) {
    auto it = vid.find({gx, gy});
    if (it != vid.end()) return it->second;
    const int id = mesh.n_vertices();
    vid.emplace(std::make_pair(gx, gy), id);
    mesh.vertices.push_back(offset + Vec2{static_cast<double>(gx) / g, static_cast<double>(gy) / g});
    return id;
  };
  for (const auto& [sx, sy] : squares)
    for (int j = 0; j < g; ++j)
      for (int i = 0; i < g; ++i) {
        const long gx = static_cast<long>(sx) * g + i, gy = static_cast<long>(sy) * g + j;
        const int a = vertex(gx, gy), b = vertex(gx + 1, gy);
        const int c = vertex(gx + 1, gy + 1), d = vertex(gx, gy + 1);
        mesh.cells.push_back({{a, b, c}, 0});
        mesh.cells.push_back({{a, c, d}, 0});
      }
  return mesh;
}

}  // namespace detail

/// Structured mesh of the requested domain at resolution level n >= 1; each
/// generating unit square (or the reference triangle) is subdivided 2^(n-1)
/// times per direction, so level 1 keeps the coarsest triangulation.
inline Mesh generate(Domain domain, int n) {
  if (n < 1) throw std::invalid_argument("generate: level must be >= 1");
  const int g = 1 << (n - 1);
  Mesh mesh;
  switch (domain) {
    case Domain::unit_square:
      mesh = detail::square_union_mesh({{0, 0}}, g, {0.0, 0.0});
      break;
    case Domain::l_shape:
      mesh = detail::square_union_mesh({{-1, -1}, {-1, 0}, {0, 0}}, g, {0.0, 0.0});
      break;
    case Domain::t_shape:
      // Bar (-1.5,1.5)x(0,1) on top of the stem (-0.5,0.5)x(-2,0),
      // generated on the integer lattice shifted by (1.5, 2).
      mesh = detail::square_union_mesh({{0, 2}, {1, 2}, {2, 2}, {1, 0}, {1, 1}}, g, {-1.5, -2.0});
      break;
    case Domain::unit_triangle: {
      std::vector<std::vector<int>> row_ids(g + 1);
      for (int j = 0; j <= g; ++j)
        for (int i = 0; i + j <= g; ++i) {
          row_ids[j].push_back(mesh.n_vertices());
          mesh.vertices.push_back({static_cast<double>(i) / g, static_cast<double>(j) / g});
        }
      for (int j = 0; j < g; ++j)
        for (int i = 0; i + j < g; ++i) {
          const int a = row_ids[j][i], b = row_ids[j][i + 1], d = row_ids[j + 1][i];
          mesh.cells.push_back({{a, b, d}, 0});
          if (i + j < g - 1) {
            const int c = row_ids[j + 1][i + 1];
            mesh.cells.push_back({{b, c, d}, 0});
          }
        }
      break;
    }
  }
  mesh.domain = domain;
  mesh.init_refinement_edges();
  mesh.finalize();
  return mesh;
}

/// Red refinement: every triangle is split into four similar children via the
/// edge midpoints.  Children refinement edges follow the longest-edge rule,
/// which agrees with the parents' by similarity.
inline Mesh uniform_refine(const Mesh& mesh) {
  Mesh fine;
  fine.domain = mesh.domain;
  fine.vertices = mesh.vertices;
  std::vector<int> mid(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    mid[e] = fine.n_vertices();
    fine.vertices.push_back(mesh.edge_midpoint(e));
  }
  fine.cells.reserve(4 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[c].v;
    // m[i] = midpoint of the edge opposite vertex i.
    const int m0 = mid[mesh.cell_edges[c][0]], m1 = mid[mesh.cell_edges[c][1]], m2 = mid[mesh.cell_edges[c][2]];
    fine.cells.push_back({{cv[0], m2, m1}, 0});
    fine.cells.push_back({{m2, cv[1], m0}, 0});
    fine.cells.push_back({{m1, m0, cv[2]}, 0});
    fine.cells.push_back({{m0, m1, m2}, 0});
  }
  fine.init_refinement_edges();
  fine.finalize();
  return fine;
}

/// Newest-vertex bisection of the marked cells plus the closure needed for
/// conformity.  Midpoints appear only on refinement edges; the closure adds a
/// cell's refinement edge whenever any of its edges is scheduled for
/// splitting, so one pass splits each affected triangle into 2 to 4 children
/// whose refinement edges oppose the newly created vertices.
inline Mesh bisect_refine(const Mesh& mesh, const std::vector<int>& marked_cells) {
  std::vector<bool> edge_marked(mesh.n_edges(), false);
  for (int c : marked_cells) {
    if (c < 0 || c >= mesh.n_cells()) throw std::invalid_argument("bisect_refine: cell id out of range");
    edge_marked[mesh.cell_edges[c][mesh.cells[c].refedge]] = true;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const int re = mesh.cell_edges[c][mesh.cells[c].refedge];
      if (edge_marked[re]) continue;
      for (int i = 0; i < 3; ++i)
        if (edge_marked[mesh.cell_edges[c][i]]) {
          edge_marked[re] = true;
          changed = true;
          break;
        }
    }
  }

  Mesh fine;
  fine.domain = mesh.domain;
  fine.vertices = mesh.vertices;
  std::vector<int> mid(mesh.n_edges(), -1);
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (edge_marked[e]) {
      mid[e] = fine.n_vertices();
      fine.vertices.push_back(mesh.edge_midpoint(e));
    }

  // Bisect (p, b, c) across its refinement edge (b, c); the children's
  // refinement edges oppose the new vertex, i.e. they are the parent edges
  // (p, b) and (c, p), whose midpoints (if also marked) drive a second split.
  auto emit = [&](auto&& self, int p, int b, int c, int edge_pb, int edge_cp, int edge_bc) -> void {
    if (edge_bc < 0 || !edge_marked[edge_bc]) {
      // Store so that the refinement edge is (b, c): local edge 0 of (p, b, c).
      fine.cells.push_back({{p, b, c}, 0});
      return;
    }
    const int m = mid[edge_bc];
    self(self, m, p, b, -1, -1, edge_pb);   // child (m, p, b), refinement edge (p, b)
    self(self, m, c, p, -1, -1, edge_cp);   // child (m, c, p), refinement edge (c, p)
  };
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[c];
    const int r = cell.refedge;
    const int p = cell.v[r], b = cell.v[(r + 1) % 3], q = cell.v[(r + 2) % 3];
    emit(emit, p, b, q, mesh.cell_edges[c][(r + 2) % 3], mesh.cell_edges[c][(r + 1) % 3],
         mesh.cell_edges[c][r]);
  }
  fine.finalize();
  return fine;
}

/// Plain-text dump: header line, then one line per vertex, cell and edge.
inline void dump_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vvpmesh 1\n";
  char buf[80];
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g\n", v.x, v.y);
    out << buf;
  }
  for (const Cell& c : mesh.cells)
    out << "c " << c.v[0] << ' ' << c.v[1] << ' ' << c.v[2] << ' ' << c.refedge << '\n';
  for (const Edge& e : mesh.edges) out << "e " << e.v0 << ' ' << e.v1 << ' ' << (e.boundary ? 1 : 0) << '\n';
}

}  // namespace vvp
