// Shared layout and load-vector helpers for the coupled
// (velocity, vorticity, pressure, mean multiplier) saddle systems.
//
// Unknown ordering: velocity dofs, vorticity dofs, pressure dofs, then one
// scalar multiplier enforcing the zero pressure mean.  Both discretizations
// use this layout; they differ only in the spaces bound to each slot.
#pragma once

#include <functional>
#include <vector>

#include "vvp/quadrature.hpp"
#include "vvp/space.hpp"

namespace vvp {

struct SaddleLayout {
  int off_y = 0;   ///< first velocity dof
  int off_w = 0;   ///< first vorticity dof
  int off_p = 0;   ///< first pressure dof
  int off_mu = 0;  ///< the mean multiplier
  int size = 0;
};

inline SaddleLayout saddle_layout(const FeSpace& velocity, const FeSpace& vorticity,
                                  const FeSpace& pressure) {
  SaddleLayout l;
  l.off_y = 0;
  l.off_w = velocity.ndofs();
  l.off_p = l.off_w + vorticity.ndofs();
  l.off_mu = l.off_p + pressure.ndofs();
  l.size = l.off_mu + 1;
  return l;
}

/// Mask over the coupled system marking strongly constrained dofs (only the
/// conforming velocity space contributes any).
inline std::vector<char> coupled_constraints(const SaddleLayout& layout,
                                             const FeSpace& velocity) {
  std::vector<char> mask(layout.size, 0);
  for (int d = 0; d < velocity.ndofs(); ++d)
    if (velocity.constrained(d)) mask[layout.off_y + d] = 1;
  return mask;
}

/// Accumulate (source, test) over a vector space into rhs at the given offset;
/// constrained rows stay untouched.  The source sees (cell, reference point,
/// physical point).
inline void add_vector_load(std::vector<double>& rhs, int offset, const FeSpace& space,
                            const std::vector<char>& constrained, int degree,
                            const std::function<Vec2(int, Vec2, Vec2)>& source) {
  const TriangleRule rule = triangle_rule(degree);
  const Mesh& mesh = space.mesh();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    const CellBasis basis(space, map, rule.points);
    const int* dofs = space.cell_dofs(c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * map.det;
      const Vec2 s = source(c, rule.points[q], map.to_physical(rule.points[q]));
      for (int i = 0; i < basis.n; ++i) {
        const double v = w * basis.val[q * basis.n + i];
        const int gx = offset + dofs[2 * i], gy = offset + dofs[2 * i + 1];
        if (!constrained[gx]) rhs[gx] += v * s.x;
        if (!constrained[gy]) rhs[gy] += v * s.y;
      }
    }
  }
}

/// Accumulate (source, test) over a scalar space into rhs at the given offset.
inline void add_scalar_load(std::vector<double>& rhs, int offset, const FeSpace& space,
                            int degree, const std::function<double(int, Vec2, Vec2)>& source) {
  const TriangleRule rule = triangle_rule(degree);
  const Mesh& mesh = space.mesh();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    const CellBasis basis(space, map, rule.points);
    const int* dofs = space.cell_dofs(c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * map.det;
      const double s = source(c, rule.points[q], map.to_physical(rule.points[q]));
      for (int i = 0; i < basis.n; ++i) rhs[offset + dofs[i]] += w * s * basis.val[q * basis.n + i];
    }
  }
}

}  // namespace vvp
