// Norms and error functionals: broken L2 integrals, the velocity norm
// |||v|||^2 = |v|^2 + |curl v|^2 + |div v|^2, and the weighted jump
// seminorms of the discontinuous scheme.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "vvp/mesh.hpp"
#include "vvp/quadrature.hpp"
#include "vvp/space.hpp"

namespace vvp {

/// Integrate a pointwise density over all cells in cell order (deterministic).
/// The callback receives the cell, the reference point and the physical point.
inline double integrate_cells(const Mesh& mesh, int degree,
                              const std::function<double(int, Vec2, Vec2)>& density) {
  const TriangleRule rule = triangle_rule(degree);
  double total = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    double local = 0.0;
    for (size_t k = 0; k < rule.points.size(); ++k)
      local += rule.weights[k] * density(c, rule.points[k], map.to_physical(rule.points[k]));
    total += local * map.det;
  }
  return total;
}

/// Integrate a density over one edge; the callback receives the physical
/// point.  The edge rule lives on [0,1] so the arc length factor is included.
inline double integrate_edge(const Mesh& mesh, int edge, int degree,
                             const std::function<double(Vec2)>& density) {
  const EdgeRule rule = edge_rule(degree);
  const Vec2 p0 = mesh.vertices[mesh.edges[edge].v0];
  const Vec2 p1 = mesh.vertices[mesh.edges[edge].v1];
  const double len = norm(p1 - p0);
  double total = 0.0;
  for (size_t k = 0; k < rule.points.size(); ++k)
    total += rule.weights[k] * density(p0 + (p1 - p0) * rule.points[k]);
  return total * len;
}

inline double l2_error_scalar(const FeFunction& fh, const std::function<double(Vec2)>& exact,
                              int degree = 8) {
  const double e2 = integrate_cells(fh.space->mesh(), degree, [&](int c, Vec2 ref, Vec2 phys) {
    const double d = eval_scalar(fh, c, ref) - exact(phys);
    return d * d;
  });
  return std::sqrt(e2);
}

inline double l2_error_vec(const FeFunction& fh, const std::function<Vec2(Vec2)>& exact,
                           int degree = 8) {
  const double e2 = integrate_cells(fh.space->mesh(), degree, [&](int c, Vec2 ref, Vec2 phys) {
    const Vec2 d = eval_vec(fh, c, ref) - exact(phys);
    return dot(d, d);
  });
  return std::sqrt(e2);
}

inline double l2_norm_scalar(const FeFunction& fh, int degree = 8) {
  return l2_error_scalar(fh, [](Vec2) { return 0.0; }, degree);
}

inline double l2_norm_vec(const FeFunction& fh, int degree = 8) {
  return l2_error_vec(fh, [](Vec2) { return Vec2{0.0, 0.0}; }, degree);
}

/// Squared broken velocity norm |v|^2 + |curl v|^2 + |div v|^2 of a discrete
/// field (elementwise derivatives).
inline double triple_norm_sq_vec(const FeFunction& fh, int degree = 8) {
  return integrate_cells(fh.space->mesh(), degree, [&](int c, Vec2 ref, Vec2) {
    Mat2 g;
    const Vec2 v = eval_vec(fh, c, ref, &g);
    const double curl = curl_from_grad(g), div = div_from_grad(g);
    return dot(v, v) + curl * curl + div * div;
  });
}

/// Squared broken velocity-norm error against an exact field given with its
/// gradient.
inline double triple_error_sq_vec(const FeFunction& fh, const std::function<Vec2(Vec2)>& exact,
                                  const std::function<Mat2(Vec2)>& exact_grad, int degree = 8) {
  return integrate_cells(fh.space->mesh(), degree, [&](int c, Vec2 ref, Vec2 phys) {
    Mat2 g;
    const Vec2 d = eval_vec(fh, c, ref, &g) - exact(phys);
    const Mat2 dg = g - exact_grad(phys);
    const double curl = curl_from_grad(dg), div = div_from_grad(dg);
    return dot(d, d) + curl * curl + div * div;
  });
}

/// Tangential and normal traces of a vector FE function on one side of an
/// edge, evaluated at a physical point; `n` is the normal used in the jump.
inline void edge_traces_vec(const FeFunction& fh, int cell, Vec2 phys, Vec2 n, double& tangential,
                            double& normal) {
  const CellMap map(fh.space->mesh(), cell);
  const Vec2 v = eval_vec(fh, cell, map.to_reference(phys));
  tangential = cross(v, n);
  normal = dot(v, n);
}

/// Squared weighted velocity jump seminorm: sum over all edges of
/// c11 |[v]_T|^2 + a11 |[v]_N|^2 with traces on boundary edges (homogeneous
/// Dirichlet data).  `c11`/`a11` give the per-edge weights.
inline double velocity_jump_sq(const FeFunction& fh, const std::vector<double>& c11,
                               const std::vector<double>& a11, int degree = 8) {
  const Mesh& mesh = fh.space->mesh();
  double total = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    const Vec2 n = mesh.edge_normal(e);
    const double je = integrate_edge(mesh, e, degree, [&](Vec2 p) {
      double t0, n0;
      edge_traces_vec(fh, edge.cell0, p, n, t0, n0);
      if (!edge.boundary) {
        double t1, n1;
        edge_traces_vec(fh, edge.cell1, p, n, t1, n1);
        t0 -= t1;
        n0 -= n1;
      }
      return c11[e] * t0 * t0 + a11[e] * n0 * n0;
    });
    total += je;
  }
  return total;
}

/// Squared weighted pressure jump seminorm over interior edges only.
inline double pressure_jump_sq(const FeFunction& fh, const std::vector<double>& d11,
                               int degree = 8) {
  const Mesh& mesh = fh.space->mesh();
  double total = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    if (edge.boundary) continue;
    const CellMap m0(mesh, edge.cell0), m1(mesh, edge.cell1);
    total += integrate_edge(mesh, e, degree, [&](Vec2 p) {
      const double jump =
          eval_scalar(fh, edge.cell0, m0.to_reference(p)) - eval_scalar(fh, edge.cell1, m1.to_reference(p));
      return d11[e] * jump * jump;
    });
  }
  return total;
}

/// Mean value of a scalar FE function over the mesh.
inline double mean_value(const FeFunction& fh, int degree = 6) {
  double area = 0.0;
  for (int c = 0; c < fh.space->mesh().n_cells(); ++c) area += fh.space->mesh().cell_area(c);
  const double integral =
      integrate_cells(fh.space->mesh(), degree, [&](int c, Vec2 ref, Vec2) { return eval_scalar(fh, c, ref); });
  return integral / area;
}

}  // namespace vvp
