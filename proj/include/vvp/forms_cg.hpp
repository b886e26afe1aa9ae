// Conforming augmented discretization of the velocity-vorticity-pressure
// state operator: bubble-enriched P1 velocity with strong Dirichlet data,
// continuous P1 vorticity and pressure, plus grad-div / curl augmentation.
//
// The coupled matrix has the block shape
//   [ A  B ]    A : velocity-vorticity coupling (nonsymmetric),
//   [ B' 0 ]    B : pressure coupling from -(p, div v),
// bordered by one row and column enforcing the zero pressure mean.  The
// adjoint operator is assembled as the exact transpose of A with the pressure
// column negated, which matches the sign convention -(grad q) in the co-state
// momentum equation and keeps the discrete gradient of the reduced cost exact.
#pragma once

#include <functional>
#include <vector>

#include "vvp/coefficients.hpp"
#include "vvp/linsolve.hpp"
#include "vvp/quadrature.hpp"
#include "vvp/saddle.hpp"
#include "vvp/space.hpp"

namespace vvp {

/// Spaces and layout of the conforming scheme on one mesh.
struct CgScheme {
  const Mesh* mesh;
  FeSpace velocity, vorticity, pressure, control;
  SaddleLayout layout;
  std::vector<char> constrained;
  double rho1, rho2;
  int quad_degree;

  CgScheme(const Mesh& m, double rho1_, double rho2_, int quad_degree_ = 8)
      : mesh(&m),
        velocity(m, SpaceKind::mini_velocity),
        vorticity(m, SpaceKind::lagrange_scalar),
        pressure(m, SpaceKind::lagrange_scalar),
        control(m, SpaceKind::const_vector, 0),
        layout(saddle_layout(velocity, vorticity, pressure)),
        constrained(coupled_constraints(layout, velocity)),
        rho1(rho1_),
        rho2(rho2_),
        quad_degree(quad_degree_) {}
};

/// Assemble the coupled state matrix; transposed = true yields the adjoint
/// operator (transposed velocity-vorticity block, negated pressure column,
/// exactly the state transpose up to the pressure-column sign).
/// Constrained velocity dofs get identity rows and columns.
inline SparseSystem assemble_cg(const CgScheme& s, const Coefficients& coeff,
                                bool transposed = false) {
  const Mesh& mesh = *s.mesh;
  const SaddleLayout& lay = s.layout;
  SparseSystem sys(lay.size);
  const std::vector<char>& fixed = s.constrained;

  auto add = [&](int row, int col, double v) {
    if (fixed[row] || fixed[col]) return;
    sys.add(row, col, v);
  };
  // entries of the velocity-vorticity superblock swap indices in the adjoint
  auto add_a = [&](int row, int col, double v) {
    if (transposed)
      add(col, row, v);
    else
      add(row, col, v);
  };

  const TriangleRule rule = triangle_rule(s.quad_degree);
  const int nv = s.velocity.local_scalar();   // scalar velocity functions (4)
  const int ns = s.vorticity.local_scalar();  // P1 functions (3)
  std::vector<double> avv(4 * nv * nv), avw(2 * nv * ns), awv(ns * 2 * nv),
      aww(ns * ns), bvp(2 * nv * ns), border(ns);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    const CellBasis vb(s.velocity, map, rule.points);
    const CellBasis pb(s.pressure, map, rule.points);  // shared by vorticity
    std::fill(avv.begin(), avv.end(), 0.0);
    std::fill(avw.begin(), avw.end(), 0.0);
    std::fill(awv.begin(), awv.end(), 0.0);
    std::fill(aww.begin(), aww.end(), 0.0);
    std::fill(bvp.begin(), bvp.end(), 0.0);
    std::fill(border.begin(), border.end(), 0.0);

    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * map.det;
      const Vec2 phys = map.to_physical(rule.points[q]);
      const double nu = coeff.nu(phys), sigma = coeff.sigma(phys);
      const Vec2 gnu = coeff.grad_nu(phys), beta = coeff.beta(phys);
      const double* bv = &vb.val[q * nv];
      const Vec2* bg = &vb.grad[q * nv];
      const double* sv = &pb.val[q * ns];

      for (int ai = 0; ai < nv; ++ai) {
        for (int ci = 0; ci < 2; ++ci) {
          const int i = 2 * ai + ci;
          const double curl_i = ci == 0 ? -bg[ai].y : bg[ai].x;
          const double rot_nu_i = (ci == 0 ? -gnu.y : gnu.x) * bv[ai];  // (grad nu x phi_i)
          for (int aj = 0; aj < nv; ++aj) {
            for (int cj = 0; cj < 2; ++cj) {
              const int j = 2 * aj + cj;
              const double curl_j = cj == 0 ? -bg[aj].y : bg[aj].x;
              double val = s.rho1 * curl_i * curl_j +
                           s.rho2 * bg[ai][ci] * bg[aj][cj] -
                           bv[ai] * bg[aj][ci] * gnu[cj];
              if (ci == cj)
                val += bv[ai] * (sigma * bv[aj] + dot(beta, bg[aj]) - dot(bg[aj], gnu));
              avv[i * 2 * nv + j] += w * val;
            }
          }
          for (int m = 0; m < ns; ++m) {
            avw[i * ns + m] += w * sv[m] * ((nu - s.rho1) * curl_i + rot_nu_i);
            awv[m * 2 * nv + i] += -w * nu * sv[m] * curl_i;
            bvp[i * ns + m] += -w * sv[m] * bg[ai][ci];
          }
        }
      }
      for (int m = 0; m < ns; ++m) {
        border[m] += w * sv[m];
        for (int n = 0; n < ns; ++n) aww[m * ns + n] += w * nu * sv[m] * sv[n];
      }
    }

    const int* vd = s.velocity.cell_dofs(c);
    const int* wd = s.vorticity.cell_dofs(c);
    const int* pd = s.pressure.cell_dofs(c);
    for (int i = 0; i < 2 * nv; ++i) {
      const int gi = lay.off_y + vd[i];
      for (int j = 0; j < 2 * nv; ++j) add_a(gi, lay.off_y + vd[j], avv[i * 2 * nv + j]);
      for (int m = 0; m < ns; ++m) {
        add_a(gi, lay.off_w + wd[m], avw[i * ns + m]);
        const double b = bvp[i * ns + m];
        add(gi, lay.off_p + pd[m], transposed ? -b : b);
        add(lay.off_p + pd[m], gi, b);
      }
    }
    for (int m = 0; m < ns; ++m) {
      const int gm = lay.off_w + wd[m];
      for (int j = 0; j < 2 * nv; ++j) add_a(gm, lay.off_y + vd[j], awv[m * 2 * nv + j]);
      for (int n = 0; n < ns; ++n) add_a(gm, lay.off_w + wd[n], aww[m * ns + n]);
      add(lay.off_mu, lay.off_p + pd[m], border[m]);
      add(lay.off_p + pd[m], lay.off_mu, border[m]);
    }
  }

  for (int d = 0; d < lay.size; ++d)
    if (fixed[d]) sys.add(d, d, 1.0);
  sys.finalize();
  return sys;
}

/// Uniform assembly entry point shared with the discontinuous scheme.
inline SparseSystem assemble_system(const CgScheme& s, const Coefficients& coeff,
                                    bool transposed = false) {
  return assemble_cg(s, coeff, transposed);
}

}  // namespace vvp
