/// Residual a posteriori error estimation: cellwise strong residuals for both
/// schemes, DG edge flux and trace penalty terms, data oscillation, global
/// aggregation under compensated summation, and the efficiency index.
#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "vvp/forms_cg.hpp"
#include "vvp/forms_dg.hpp"
#include "vvp/norms.hpp"
#include "vvp/optctl.hpp"
#include "vvp/problems.hpp"

namespace vvp {

/// Per-cell squared indicators; the DG entries fold interior residual, edge
/// flux, and trace penalty terms together, with the separate breakdown kept
/// for diagnostics.  Oscillations are zero for CG (exact coefficients).
struct LocalIndicators {
  std::vector<double> eta_y_sq, eta_w_sq, eta_u_sq;
  std::vector<double> eta_e_sq, eta_j_sq;      ///< DG breakdown (state+co-state)
  std::vector<double> theta_y_sq, theta_w_sq;  ///< DG data oscillation
  bool dg = false;
};

struct GlobalEstimate {
  double eta_y = 0.0, eta_w = 0.0, eta_u = 0.0, eta_total = 0.0, theta_total = 0.0;
};

namespace detail {

/// Neumaier compensated accumulator; fixed visiting order keeps the global
/// totals bitwise reproducible.
struct CompensatedSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace detail

/// Square-root aggregates of the per-cell squared indicators, in cell order.
inline GlobalEstimate global_estimate(const LocalIndicators& ind) {
  detail::CompensatedSum y, w, u, t;
  for (size_t c = 0; c < ind.eta_y_sq.size(); ++c) {
    y.add(ind.eta_y_sq[c]);
    w.add(ind.eta_w_sq[c]);
    u.add(ind.eta_u_sq[c]);
    if (ind.dg) {
      t.add(ind.theta_y_sq[c]);
      t.add(ind.theta_w_sq[c]);
    }
  }
  GlobalEstimate g;
  g.eta_y = std::sqrt(y.value());
  g.eta_w = std::sqrt(w.value());
  g.eta_u = std::sqrt(u.value());
  g.eta_total = std::sqrt(y.value() + w.value() + u.value());
  g.theta_total = std::sqrt(t.value());
  return g;
}

inline double efficiency_index(double eta_total, double total_error) {
  return eta_total / total_error;
}

namespace detail {

/// Pointwise strong residuals shared by both schemes.  The co-state momentum
/// residual uses the transposed operator actually assembled (viscosity channel
/// integrated by parts onto the co-state), so inserting the exact solution
/// yields an identically zero residual.
struct ResidualEval {
  const Coefficients* c;
  double rho1, rho2;

  /// State momentum: f + u - (-2 eps(y) grad nu + nu curl omega + (beta.grad)y
  /// + sigma y + grad p).
  static Vec2 state_momentum(Vec2 f_plus_u, Vec2 y, const Mat2& gy, Vec2 gom, double nu,
                             Vec2 gnu, Vec2 beta, double sigma, Vec2 gp) {
    return f_plus_u + 2.0 * (sym(gy) * gnu) - nu * curl_of_scalar(gom) - gy * beta -
           sigma * y - gp;
  }

  /// Transposed momentum row applied to (w, theta, q) minus the tracking term.
  Vec2 costate_momentum(Vec2 yh, Vec2 yd, Vec2 w, const Mat2& gw, const Mat2& hw0,
                        const Mat2& hw1, double theta, Vec2 gth, double nu, Vec2 gnu, Mat2 hnu,
                        Vec2 beta, double div_beta, double sigma, Vec2 gq) const {
    const Vec2 curl_nu_theta = nu * curl_of_scalar(gth) + theta * curl_of_scalar(gnu);
    // second-derivative combinations of w: curl(curl w) and grad(div w)
    const Vec2 curl_curl_w{hw1.a01 - hw0.a11, hw0.a01 - hw1.a00};
    const Vec2 grad_div_w{hw0.a00 + hw1.a01, hw0.a01 + hw1.a11};
    const Vec2 op = hnu.trace() * w + gw * gnu + hnu * w + div_from_grad(gw) * gnu -
                    curl_nu_theta + sigma * w - gw * beta - div_beta * w +
                    rho1 * curl_curl_w - rho2 * grad_div_w - gq;
    return yh - yd - op;
  }

  /// Co-state constitutive relation nu theta + (nu-rho1) curl w + grad(nu) x w
  /// - (omega - omega_d).
  double costate_constitutive(double theta, const Mat2& gw, Vec2 w, double omega,
                              double omega_d, double nu, Vec2 gnu) const {
    return nu * theta + (nu - rho1) * curl_from_grad(gw) + cross(gnu, w) - omega + omega_d;
  }
};

}  // namespace detail

/// Volumetric indicators of the conforming scheme, literal strong residuals
/// with exact coefficients (no edge terms: vorticity and pressure are
/// continuous).
inline LocalIndicators cg_indicators(const CgScheme& s, const Problem& prob,
                                     const SolutionBundle& b) {
  const Mesh& mesh = *s.mesh;
  const Coefficients& cf = prob.coeff;
  const detail::ResidualEval re{&cf, s.rho1, s.rho2};
  const TriangleRule rule = triangle_rule(5);  // 2k+3 with k = 1

  LocalIndicators out;
  out.dg = false;
  const int nc = mesh.n_cells();
  out.eta_y_sq.assign(nc, 0.0);
  out.eta_w_sq.assign(nc, 0.0);
  out.eta_u_sq.assign(nc, 0.0);
  out.theta_y_sq.assign(nc, 0.0);
  out.theta_w_sq.assign(nc, 0.0);

  for (int c = 0; c < nc; ++c) {
    const CellMap map(mesh, c);
    const double h2 = mesh.cell_diameter(c) * mesh.cell_diameter(c);
    double my = 0.0, cy = 0.0, dy = 0.0, mw = 0.0, cw = 0.0, dw = 0.0, mu = 0.0;
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2 ref = rule.points[k];
      const Vec2 x = map.to_physical(ref);
      const double wq = rule.weights[k] * map.det;
      const double nu = cf.nu(x), sigma = cf.sigma(x), dbeta = cf.div_beta(x);
      const Vec2 gnu = cf.grad_nu(x), beta = cf.beta(x);
      const Mat2 hnu = cf.hess_nu(x);

      Mat2 gy, gw_;
      Vec2 gom, gth, gp, gq;
      const Vec2 yv = eval_vec(b.y, c, ref, &gy);
      const double om = eval_scalar(b.omega, c, ref, &gom);
      eval_scalar(b.p, c, ref, &gp);
      const Vec2 wv = eval_vec(b.w, c, ref, &gw_);
      const double th = eval_scalar(b.theta, c, ref, &gth);
      eval_scalar(b.q, c, ref, &gq);
      const Vec2 uv = eval_vec(b.u, c, ref);
      Mat2 hw0, hw1;
      eval_vec_second(b.w, c, ref, hw0, hw1);

      const Vec2 ry = detail::ResidualEval::state_momentum(prob.f(x) + uv, yv, gy, gom, nu,
                                                           gnu, beta, sigma, gp);
      my += wq * dot(ry, ry);
      const double cty = om - curl_from_grad(gy);
      cy += wq * cty * cty;
      const double dvy = div_from_grad(gy);
      dy += wq * dvy * dvy;

      const Vec2 rw = re.costate_momentum(yv, prob.y_d(x), wv, gw_, hw0, hw1, th, gth, nu, gnu,
                                          hnu, beta, dbeta, sigma, gq);
      mw += wq * dot(rw, rw);
      const double ctw = re.costate_constitutive(th, gw_, wv, om, prob.omega_d(x), nu, gnu);
      cw += wq * ctw * ctw;
      const double dvw = div_from_grad(gw_);
      dw += wq * dvw * dvw;

      const Vec2 ru = wv + cf.gamma * uv;
      mu += wq * dot(ru, ru);
    }
    out.eta_y_sq[c] = h2 * my + cy + dy;
    out.eta_w_sq[c] = h2 * mw + cw + dw;
    out.eta_u_sq[c] = h2 * mu;
  }
  return out;
}

/// Indicators of the stabilized scheme: interior strong residuals with exact
/// coefficients, interelement flux jumps of (p I - omega) and (q I - theta),
/// trace penalty terms with the per-edge weights, and separately reported data
/// oscillation against cellwise projected coefficients and data.
inline LocalIndicators dg_indicators(const DgScheme& s, const Problem& prob,
                                     const SolutionBundle& b) {
  const Mesh& mesh = *s.mesh;
  const Coefficients& cf = prob.coeff;
  const detail::ResidualEval re{&cf, s.rho1, s.rho2};
  const int deg = 2 * s.k + 3;
  const TriangleRule rule = triangle_rule(deg);

  // cellwise L2 projections onto P_k
  const FeSpace veck(mesh, s.k == 0 ? SpaceKind::const_vector : SpaceKind::dg_vector, s.k);
  const FeFunction nu_h = interpolate(s.vorticity, cf.nu);
  const FeFunction sig_h = interpolate(s.vorticity, cf.sigma);
  const FeFunction dbt_h = interpolate(s.vorticity, cf.div_beta);
  const FeFunction beta_h = interpolate_vec(veck, cf.beta);
  const FeFunction f_h = interpolate_vec(veck, prob.f);
  const FeFunction yd_h = interpolate_vec(veck, prob.y_d);
  const FeFunction wd_h = interpolate(s.vorticity, prob.omega_d);

  LocalIndicators out;
  out.dg = true;
  const int nc = mesh.n_cells();
  out.eta_y_sq.assign(nc, 0.0);
  out.eta_w_sq.assign(nc, 0.0);
  out.eta_u_sq.assign(nc, 0.0);
  out.eta_e_sq.assign(nc, 0.0);
  out.eta_j_sq.assign(nc, 0.0);
  out.theta_y_sq.assign(nc, 0.0);
  out.theta_w_sq.assign(nc, 0.0);

  for (int c = 0; c < nc; ++c) {
    const CellMap map(mesh, c);
    const double h2 = mesh.cell_diameter(c) * mesh.cell_diameter(c);
    double my = 0.0, cy = 0.0, mw = 0.0, cw = 0.0, mu = 0.0, oy = 0.0, ow = 0.0;
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2 ref = rule.points[k];
      const Vec2 x = map.to_physical(ref);
      const double wq = rule.weights[k] * map.det;

      Mat2 gy, gw_;
      Vec2 gom, gth, gp, gq, gnuh;
      const Vec2 yv = eval_vec(b.y, c, ref, &gy);
      const double om = eval_scalar(b.omega, c, ref, &gom);
      eval_scalar(b.p, c, ref, &gp);
      const Vec2 wv = eval_vec(b.w, c, ref, &gw_);
      const double th = eval_scalar(b.theta, c, ref, &gth);
      eval_scalar(b.q, c, ref, &gq);
      const Vec2 uv = eval_vec(b.u, c, ref);
      Mat2 hw0, hw1;
      eval_vec_second(b.w, c, ref, hw0, hw1);

      const double nu = cf.nu(x), sigma = cf.sigma(x), dbeta = cf.div_beta(x);
      const Vec2 gnu = cf.grad_nu(x), beta = cf.beta(x);
      const Mat2 hnu = cf.hess_nu(x);

      // interior residuals with exact coefficients and data; the divergence
      // residual of the conforming estimator has no counterpart here
      const Vec2 ry = detail::ResidualEval::state_momentum(prob.f(x) + uv, yv, gy, gom, nu,
                                                           gnu, beta, sigma, gp);
      my += wq * dot(ry, ry);
      const double cty = om - curl_from_grad(gy);
      cy += wq * cty * cty;
      const Vec2 rw = re.costate_momentum(yv, prob.y_d(x), wv, gw_, hw0, hw1, th, gth, nu, gnu,
                                          hnu, beta, dbeta, sigma, gq);
      mw += wq * dot(rw, rw);
      const double ctw = re.costate_constitutive(th, gw_, wv, om, prob.omega_d(x), nu, gnu);
      cw += wq * ctw * ctw;
      const Vec2 ru = wv + cf.gamma * uv;
      mu += wq * dot(ru, ru);

      // data oscillation: exact minus projected, against the discrete fields
      const double nup = eval_scalar(nu_h, c, ref, &gnuh);
      const double sgp = eval_scalar(sig_h, c, ref);
      const double dbp = eval_scalar(dbt_h, c, ref);
      const Vec2 btp = eval_vec(beta_h, c, ref);
      const Vec2 df = prob.f(x) - eval_vec(f_h, c, ref);
      const Vec2 dvis_y = 2.0 * (sym(gy) * (gnu - gnuh));
      const Vec2 dcrl_y = (nu - nup) * curl_of_scalar(gom);
      const Vec2 dcnv_y = gy * (beta - btp);
      const Vec2 dsig_y = (sigma - sgp) * yv;
      oy += wq * (dot(df, df) + dot(dvis_y, dvis_y) + dot(dcrl_y, dcrl_y) +
                  dot(dcnv_y, dcnv_y) + dot(dsig_y, dsig_y));
      const Vec2 dyd = prob.y_d(x) - eval_vec(yd_h, c, ref);
      const Vec2 dvis_w = 2.0 * (sym(gw_) * (gnu - gnuh));
      const Vec2 dcrl_w = (nu - nup) * curl_of_scalar(gth);
      const Vec2 dcnv_w = gw_ * (beta - btp);
      const Vec2 dsig_w = ((sigma - dbeta) - (sgp - dbp)) * wv;
      const double dwd = prob.omega_d(x) - eval_scalar(wd_h, c, ref);
      ow += wq * (dot(dyd, dyd) + dot(dvis_w, dvis_w) + dot(dcrl_w, dcrl_w) +
                  dot(dcnv_w, dcnv_w) + dot(dsig_w, dsig_w) + dwd * dwd);
    }
    out.eta_y_sq[c] = h2 * my + cy;
    out.eta_w_sq[c] = h2 * mw + cw;
    out.eta_u_sq[c] = h2 * mu;
    out.theta_y_sq[c] = h2 * oy;
    out.theta_w_sq[c] = h2 * ow;
  }

  // edge flux jumps and trace penalties; interior edges scatter half to each
  // neighbor, boundary traces (weak Dirichlet data) count fully.  The flux
  // jump of (p I - omega J) n splits into the normal pressure jump and the
  // tangential vorticity jump, hence the two scalar jumps below.
  const EdgeRule erule = edge_rule(deg);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[e];
    const Vec2 n = mesh.edge_normal(e);
    const double hE = mesh.edge_length(e);
    const Vec2 pa = mesh.vertices[edge.v0], pb = mesh.vertices[edge.v1];
    const CellMap m0(mesh, edge.cell0);
    double flux_y = 0.0, flux_w = 0.0, jump_y = 0.0, jump_w = 0.0;
    for (size_t k = 0; k < erule.points.size(); ++k) {
      const Vec2 p = pa + (pb - pa) * erule.points[k];
      const double wq = erule.weights[k] * hE;
      double ty, ny, tw, nw;
      edge_traces_vec(b.y, edge.cell0, p, n, ty, ny);
      edge_traces_vec(b.w, edge.cell0, p, n, tw, nw);
      const Vec2 r0 = m0.to_reference(p);
      double jp = eval_scalar(b.p, edge.cell0, r0);
      double jq = eval_scalar(b.q, edge.cell0, r0);
      double jo = eval_scalar(b.omega, edge.cell0, r0);
      double jt = eval_scalar(b.theta, edge.cell0, r0);
      if (edge.boundary) {
        // pressure traces are not penalized on the boundary
        jump_y += wq * (s.stab.c11[e] + s.stab.a11[e]) * (ty * ty + ny * ny);
        jump_w += wq * (s.stab.c11[e] + s.stab.a11[e]) * (tw * tw + nw * nw);
        continue;
      }
      const CellMap m1(mesh, edge.cell1);
      const Vec2 r1 = m1.to_reference(p);
      double t1, n1, tw1, nw1;
      edge_traces_vec(b.y, edge.cell1, p, n, t1, n1);
      edge_traces_vec(b.w, edge.cell1, p, n, tw1, nw1);
      ty -= t1;
      ny -= n1;
      tw -= tw1;
      nw -= nw1;
      jp -= eval_scalar(b.p, edge.cell1, r1);
      jq -= eval_scalar(b.q, edge.cell1, r1);
      jo -= eval_scalar(b.omega, edge.cell1, r1);
      jt -= eval_scalar(b.theta, edge.cell1, r1);
      flux_y += wq * hE * (jp * jp + jo * jo);
      flux_w += wq * hE * (jq * jq + jt * jt);
      jump_y += wq * (s.stab.c11[e] * ty * ty + s.stab.a11[e] * ny * ny + s.stab.d11[e] * jp * jp);
      jump_w += wq * (s.stab.c11[e] * tw * tw + s.stab.a11[e] * nw * nw + s.stab.d11[e] * jq * jq);
    }
    if (edge.boundary) {
      out.eta_j_sq[edge.cell0] += jump_y + jump_w;
      out.eta_y_sq[edge.cell0] += jump_y;
      out.eta_w_sq[edge.cell0] += jump_w;
    } else {
      for (const int cc : {edge.cell0, edge.cell1}) {
        out.eta_e_sq[cc] += 0.5 * (flux_y + flux_w);
        out.eta_j_sq[cc] += 0.5 * (jump_y + jump_w);
        out.eta_y_sq[cc] += 0.5 * (flux_y + jump_y);
        out.eta_w_sq[cc] += 0.5 * (flux_w + jump_w);
      }
    }
  }

  return out;
}

/// Per-field error norms against the exact solution, in the norms of the
/// scheme that produced the bundle; all NaN when the problem carries no exact
/// solution.
struct ErrorReport {
  double u = std::nan(""), y_triple = std::nan(""), w_triple = std::nan("");
  double omega = std::nan(""), theta = std::nan(""), p = std::nan(""), q = std::nan("");
  bool valid = false;
};

/// Product norm driving the estimator: control in L2, velocities in the triple
/// (or mesh-dependent) norm, vorticities and pressures in (possibly jump
/// augmented) L2.
inline double product_norm(const ErrorReport& e) {
  return std::sqrt(e.u * e.u + e.y_triple * e.y_triple + e.omega * e.omega + e.p * e.p +
                   e.w_triple * e.w_triple + e.theta * e.theta + e.q * e.q);
}

inline ErrorReport error_report(const CgScheme&, const Problem& prob, const SolutionBundle& b,
                                int degree = 8) {
  ErrorReport r;
  if (!prob.has_exact) return r;
  r.valid = true;
  r.u = l2_error_vec(b.u, prob.u, degree);
  r.y_triple = std::sqrt(triple_error_sq_vec(b.y, prob.y, prob.grad_y, degree));
  r.omega = l2_error_scalar(b.omega, prob.omega, degree);
  r.p = l2_error_scalar(b.p, prob.p, degree);
  r.w_triple = std::sqrt(triple_error_sq_vec(b.w, prob.w, prob.grad_w, degree));
  r.theta = l2_error_scalar(b.theta, prob.theta, degree);
  r.q = l2_error_scalar(b.q, prob.q, degree);
  return r;
}

/// The exact fields are continuous with zero velocity trace, so the jump part
/// of each error norm is the jump seminorm of the discrete field itself.
inline ErrorReport error_report(const DgScheme& s, const Problem& prob, const SolutionBundle& b,
                                int degree = 8) {
  ErrorReport r;
  if (!prob.has_exact) return r;
  r.valid = true;
  r.u = l2_error_vec(b.u, prob.u, degree);
  r.y_triple = std::sqrt(triple_error_sq_vec(b.y, prob.y, prob.grad_y, degree) +
                         velocity_jump_sq(b.y, s.stab.c11, s.stab.a11, degree));
  r.omega = l2_error_scalar(b.omega, prob.omega, degree);
  const double ep = l2_error_scalar(b.p, prob.p, degree);
  r.p = std::sqrt(ep * ep + pressure_jump_sq(b.p, s.stab.d11, degree));
  r.w_triple = std::sqrt(triple_error_sq_vec(b.w, prob.w, prob.grad_w, degree) +
                         velocity_jump_sq(b.w, s.stab.c11, s.stab.a11, degree));
  r.theta = l2_error_scalar(b.theta, prob.theta, degree);
  const double eq = l2_error_scalar(b.q, prob.q, degree);
  r.q = std::sqrt(eq * eq + pressure_jump_sq(b.q, s.stab.d11, degree));
  return r;
}

inline double cg_total_error(const CgScheme& s, const Problem& prob, const SolutionBundle& b,
                             int degree = 8) {
  return product_norm(error_report(s, prob, b, degree));
}

inline double dg_total_error(const DgScheme& s, const Problem& prob, const SolutionBundle& b,
                             int degree = 8) {
  return product_norm(error_report(s, prob, b, degree));
}

/// Scheme-dispatching entry points used by the adaptive loop and the harness.
inline LocalIndicators indicators(const CgScheme& s, const Problem& prob,
                                  const SolutionBundle& b) {
  return cg_indicators(s, prob, b);
}
inline LocalIndicators indicators(const DgScheme& s, const Problem& prob,
                                  const SolutionBundle& b) {
  return dg_indicators(s, prob, b);
}

/// Write the per-cell squared indicators; header text and %.17g formatting are
/// part of the output contract.
inline void write_indicator_csv(std::ostream& os, const LocalIndicators& ind) {
  os << "cell_id,eta_y_sq,eta_w_sq,eta_u_sq\n";
  char line[160];
  for (size_t c = 0; c < ind.eta_y_sq.size(); ++c) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", c, ind.eta_y_sq[c],
                  ind.eta_w_sq[c], ind.eta_u_sq[c]);
    os << line;
  }
}

}  // namespace vvp
