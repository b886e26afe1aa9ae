// Discontinuous Galerkin discretization of the velocity-vorticity-pressure
// state operator: (P_{k+1})^2 velocity, P_k vorticity and pressure, all
// discontinuous, with weakly imposed Dirichlet data.  Inter-element coupling
// uses tangential/normal jump penalties (C11, A11), vorticity-velocity trace
// consistency terms, upwind convective fluxes, and a pressure-jump
// stabilization (D11) acting in the continuity equation only.
//
// Block shape and adjoint convention match the conforming scheme:
//   [ A  B ]   A : velocity-vorticity superblock (volume + edge + upwind),
//   [ B' D ]   B : pressure coupling -(p, div v) + {{p}}[[v]]_N,
// D = pressure-jump stabilization (interior edges), bordered by the
// mean-pressure row/column.  The stabilization enters the continuity row with
// the sign that keeps the usual saddle-point energy argument intact: testing
// the state system with (v, -p) leaves the coercive part plus the pressure
// jumps, so the coupled matrix stays provably nonsingular.  The adjoint is
// again the exact transpose with the pressure column negated.
#pragma once

#include <algorithm>
#include <vector>

#include "vvp/coefficients.hpp"
#include "vvp/linsolve.hpp"
#include "vvp/quadrature.hpp"
#include "vvp/saddle.hpp"
#include "vvp/space.hpp"

namespace vvp {

/// Per-edge stabilization weights; a11/c11 scale like 1/h, d11 like h.
struct EdgeStabilization {
  std::vector<double> a11, c11, d11;
};

/// Evaluate the per-edge weights from the mesh-independent constants:
/// interior edges use max over the two neighbor diameters, boundary edges the
/// owning cell's diameter.
inline EdgeStabilization stab_params(const Mesh& mesh, double a11, double c11, double d11) {
  EdgeStabilization stab;
  const int ne = mesh.n_edges();
  stab.a11.resize(ne);
  stab.c11.resize(ne);
  stab.d11.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edges[e];
    const double h0 = mesh.cell_diameter(edge.cell0);
    const double hmax = edge.boundary ? h0 : std::max(h0, mesh.cell_diameter(edge.cell1));
    const double hinv = edge.boundary ? 1.0 / h0 : std::max(1.0 / h0, 1.0 / mesh.cell_diameter(edge.cell1));
    stab.a11[e] = a11 * hinv;
    stab.c11[e] = c11 * hinv;
    stab.d11[e] = d11 * hmax;
  }
  return stab;
}

/// Mesh-independent stabilization constants.
struct StabConstants {
  double a11, c11, d11;
};

/// Constants used when the caller does not override them.  The penalties act
/// on nu-weighted jumps while the scheme norm weighs plain jumps, so in a
/// high-contrast viscosity both need a lift above 10 nu1 to control the norm
/// where nu is near nu0.  The tangential weight c11 takes the full 1/nu0
/// floor; the normal weight a11 only the geometric mean sqrt(10 nu1 / nu0),
/// because the normal penalty competes with the pressure coupling and a full
/// 1/nu0 there stalls the control fixed point.  The pressure-jump weight
/// stays O(1) for the same reason.  All three collapse to the plain rule
/// (10 nu1, 10 nu1, 1) when the viscosity contrast is mild.
inline StabConstants default_stab_constants(const Coefficients& coeff) {
  const double plain = 10.0 * coeff.nu1;
  return {std::max(plain, std::sqrt(plain / coeff.nu0)), std::max(plain, 1.0 / coeff.nu0), 1.0};
}

/// Spaces, layout and stabilization of the discontinuous scheme on one mesh.
struct DgScheme {
  const Mesh* mesh;
  FeSpace velocity, vorticity, pressure, control;
  SaddleLayout layout;
  std::vector<char> constrained;  // all free: Dirichlet data is weak
  double rho1, rho2;
  EdgeStabilization stab;
  int k;
  int quad_degree;

  DgScheme(const Mesh& m, int k_, double rho1_, double rho2_, double a11, double c11, double d11,
           int quad_degree_ = 8)
      : mesh(&m),
        velocity(m, SpaceKind::dg_vector, k_ + 1),
        vorticity(m, SpaceKind::dg_scalar, k_),
        pressure(m, SpaceKind::dg_scalar, k_),
        control(m, SpaceKind::const_vector, 0),
        layout(saddle_layout(velocity, vorticity, pressure)),
        constrained(coupled_constraints(layout, velocity)),
        rho1(rho1_),
        rho2(rho2_),
        stab(stab_params(m, a11, c11, d11)),
        k(k_),
        quad_degree(quad_degree_) {}
};

namespace detail {

/// Traces of all local scalar basis functions of `space` on `cell` along an
/// edge, sampled at the physical points `phys` (shared by both sides so the
/// two traces meet at identical coordinates).
inline void edge_trace_values(const FeSpace& space, int cell, const std::vector<Vec2>& phys,
                              std::vector<double>& values) {
  const CellMap map(space.mesh(), cell);
  const int n = space.local_scalar();
  values.assign(phys.size() * n, 0.0);
  for (size_t q = 0; q < phys.size(); ++q)
    space.ref_basis().eval(map.to_reference(phys[q]), &values[q * n], nullptr);
}

}  // namespace detail

/// Assemble the coupled DG state matrix; transposed = true yields the adjoint
/// operator (transposed velocity-vorticity superblock including the upwind
/// convection, negated pressure column, exactly the state transpose up to the
/// pressure-column sign).
inline SparseSystem assemble_dg(const DgScheme& s, const Coefficients& coeff,
                                bool transposed = false) {
  const Mesh& mesh = *s.mesh;
  const SaddleLayout& lay = s.layout;
  SparseSystem sys(lay.size);

  auto add = [&](int row, int col, double v) { sys.add(row, col, v); };
  // entries of the velocity-vorticity superblock swap indices in the adjoint
  auto add_a = [&](int row, int col, double v) {
    if (transposed)
      add(col, row, v);
    else
      add(row, col, v);
  };
  // momentum-row pressure coupling and its continuity-row mirror
  auto add_b = [&](int vrow, int pcol, double v) {
    add(vrow, pcol, transposed ? -v : v);
    add(pcol, vrow, v);
  };

  const TriangleRule rule = triangle_rule(s.quad_degree);
  const int nv = s.velocity.local_scalar();
  const int ns = s.vorticity.local_scalar();
  std::vector<double> avv(4 * nv * nv), avw(2 * nv * ns), awv(ns * 2 * nv), aww(ns * ns),
      bvp(2 * nv * ns), border(ns);

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
      const double reaction = sigma - coeff.div_beta(phys);
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
              double val = s.rho1 * curl_i * curl_j + s.rho2 * bg[ai][ci] * bg[aj][cj] -
                           bv[ai] * bg[aj][ci] * gnu[cj];
              if (ci == cj)
                val += bv[ai] * (reaction * bv[aj] - dot(bg[aj], gnu)) -
                       bv[aj] * dot(beta, bg[ai]);  // transport integrated by parts
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
        add_b(gi, lay.off_p + pd[m], bvp[i * ns + m]);
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

  // Edge terms.  Side 0 is edges[e].cell0 whose outward normal is
  // edge_normal(e); jumps weight side 0 by +1 and side 1 by -1.
  const EdgeRule erule = edge_rule(s.quad_degree);
  std::vector<Vec2> phys_pts;
  std::vector<double> tv[2], tp[2];
  std::vector<double> evv, evw, ewv, ebp, edd;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    const int nside = edge.boundary ? 1 : 2;
    const Vec2 p0 = mesh.vertices[edge.v0], p1 = mesh.vertices[edge.v1];
    const double len = norm(p1 - p0);
    const Vec2 n = mesh.edge_normal(e);
    const int cells[2] = {edge.cell0, edge.cell1};

    phys_pts.resize(erule.points.size());
    for (size_t q = 0; q < erule.points.size(); ++q)
      phys_pts[q] = p0 + (p1 - p0) * erule.points[q];
    for (int side = 0; side < nside; ++side) {
      detail::edge_trace_values(s.velocity, cells[side], phys_pts, tv[side]);
      detail::edge_trace_values(s.pressure, cells[side], phys_pts, tp[side]);
    }

    const int lv = nside * 2 * nv, lsc = nside * ns;  // local edge dof counts
    evv.assign(static_cast<size_t>(lv) * lv, 0.0);
    evw.assign(static_cast<size_t>(lv) * lsc, 0.0);
    ewv.assign(static_cast<size_t>(lsc) * lv, 0.0);
    ebp.assign(static_cast<size_t>(lv) * lsc, 0.0);
    edd.assign(static_cast<size_t>(lsc) * lsc, 0.0);
    const double c11e = s.stab.c11[e], a11e = s.stab.a11[e], d11e = s.stab.d11[e];
    const double avg = edge.boundary ? 1.0 : 0.5;

    for (size_t q = 0; q < erule.points.size(); ++q) {
      const double w = erule.weights[q] * len;
      const Vec2 x = phys_pts[q];
      const double nu = coeff.nu(x);
      const double bn = dot(coeff.beta(x), n);  // upwind side 0 when positive

      for (int si = 0; si < nside; ++si) {
        const double sgn_i = si == 0 ? 1.0 : -1.0;
        for (int ai = 0; ai < nv; ++ai) {
          const double vi = tv[si][q * nv + ai];
          for (int ci = 0; ci < 2; ++ci) {
            const int i = si * 2 * nv + 2 * ai + ci;
            const double jt_i = sgn_i * vi * (ci == 0 ? n.y : -n.x);  // [[v]]_T weight
            const double jn_i = sgn_i * vi * n[ci];                   // [[v]]_N weight
            for (int sj = 0; sj < nside; ++sj) {
              const double sgn_j = sj == 0 ? 1.0 : -1.0;
              for (int aj = 0; aj < nv; ++aj) {
                const double vj = tv[sj][q * nv + aj];
                for (int cj = 0; cj < 2; ++cj) {
                  const int j = sj * 2 * nv + 2 * aj + cj;
                  const double jt_j = sgn_j * vj * (cj == 0 ? n.y : -n.x);
                  const double jn_j = sgn_j * vj * n[cj];
                  double val = nu * c11e * jt_i * jt_j + a11e * jn_i * jn_j;
                  // upwind flux: trial trace from the upwind side, tested
                  // against the jump seen from the upwind cell
                  if (ci == cj) {
                    if (bn > 0.0 && sj == 0)
                      val += bn * vj * sgn_i * vi;
                    else if (bn < 0.0 && sj == 1 && !edge.boundary)
                      val += -bn * vj * (-sgn_i) * vi;
                  }
                  evv[static_cast<size_t>(i) * lv + j] += w * val;
                }
              }
            }
            for (int sm = 0; sm < nside; ++sm) {
              for (int m = 0; m < ns; ++m) {
                const double pm = tp[sm][q * ns + m];
                const int gm = sm * ns + m;
                // {{omega}}.[[nu v]]_T  and  -{{theta}}.[[nu y]]_T
                evw[static_cast<size_t>(i) * lsc + gm] += w * nu * avg * pm * jt_i;
                ewv[static_cast<size_t>(gm) * lv + i] += -w * nu * avg * pm * jt_i;
                // {{p}}[[v]]_N in the momentum row, mirrored to continuity
                ebp[static_cast<size_t>(i) * lsc + gm] += w * avg * pm * jn_i;
              }
            }
          }
        }
      }
      if (!edge.boundary) {
        for (int sm = 0; sm < nside; ++sm) {
          const double sgn_m = sm == 0 ? 1.0 : -1.0;
          for (int m = 0; m < ns; ++m) {
            const double jm = sgn_m * tp[sm][q * ns + m];  // [[p]] weight
            for (int sn = 0; sn < nside; ++sn) {
              const double sgn_n = sn == 0 ? 1.0 : -1.0;
              for (int nn = 0; nn < ns; ++nn)
                edd[static_cast<size_t>(sm * ns + m) * lsc + sn * ns + nn] +=
                    w * d11e * jm * sgn_n * tp[sn][q * ns + nn];
            }
          }
        }
      }
    }

    // scatter: global dof of local edge index
    auto vel_dof = [&](int i) {
      return lay.off_y + s.velocity.cell_dofs(cells[i / (2 * nv)])[i % (2 * nv)];
    };
    auto scal_dof = [&](const FeSpace& sp, int off, int m) {
      return off + sp.cell_dofs(cells[m / ns])[m % ns];
    };
    for (int i = 0; i < lv; ++i) {
      const int gi = vel_dof(i);
      for (int j = 0; j < lv; ++j) add_a(gi, vel_dof(j), evv[static_cast<size_t>(i) * lv + j]);
      for (int m = 0; m < lsc; ++m) {
        add_a(gi, scal_dof(s.vorticity, lay.off_w, m), evw[static_cast<size_t>(i) * lsc + m]);
        add_b(gi, scal_dof(s.pressure, lay.off_p, m), ebp[static_cast<size_t>(i) * lsc + m]);
      }
    }
    for (int m = 0; m < lsc; ++m) {
      const int gm = scal_dof(s.vorticity, lay.off_w, m);
      for (int j = 0; j < lv; ++j) add_a(gm, vel_dof(j), ewv[static_cast<size_t>(m) * lv + j]);
    }
    if (!edge.boundary) {
      // pressure-jump stabilization in the continuity row; the sign flips in
      // the adjoint because the pressure column is negated there
      for (int m = 0; m < lsc; ++m) {
        const int gm = scal_dof(s.pressure, lay.off_p, m);
        for (int nn = 0; nn < lsc; ++nn) {
          const double d = edd[static_cast<size_t>(m) * lsc + nn];
          add(gm, scal_dof(s.pressure, lay.off_p, nn), transposed ? d : -d);
        }
      }
    }
  }

  sys.finalize();
  return sys;
}

/// Uniform assembly entry point shared with the conforming scheme.
inline SparseSystem assemble_system(const DgScheme& s, const Coefficients& coeff,
                                    bool transposed = false) {
  return assemble_dg(s, coeff, transposed);
}

}  // namespace vvp
