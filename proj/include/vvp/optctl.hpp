// The optimal-control layer: state and co-state solves with cached
// factorizations, the damped projected fixed-point iteration for the coupled
// optimality system, and the cost / variational-inequality / gradient
// diagnostics that certify a computed control.
//
// Because the co-state operator is the exact transpose of the state operator,
// the map u -> (gamma u + mean of w_h, .) is the exact gradient of the
// discrete reduced cost over piecewise-constant controls; the fixed point
// iterates the canonical projection formula u = clamp(-P0(w_h)/gamma).
#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "vvp/coefficients.hpp"
#include "vvp/linsolve.hpp"
#include "vvp/norms.hpp"
#include "vvp/problems.hpp"
#include "vvp/saddle.hpp"
#include "vvp/space.hpp"

namespace vvp {

struct IterationRecord {
  int iter;
  double du_norm;
  double cost;
};

/// Discrete solution of the coupled optimality system on one mesh.
struct SolutionBundle {
  FeFunction y, omega, p;  ///< state velocity, vorticity, pressure
  FeFunction w, theta, q;  ///< co-state velocity, vorticity, pressure
  FeFunction u;            ///< piecewise-constant control
  double state_multiplier = 0.0, adjoint_multiplier = 0.0;
  bool converged = false;
  int iterations = 0;
  double cost = 0.0;
  double vi = 0.0;  ///< post-hoc variational-inequality residual
  std::vector<IterationRecord> log;
};

struct FixedPointOptions {
  double damping = 1.0;  ///< initial step; auto-halved on cost increase, floor 1/16
  double tol = 1e-8;     ///< absolute L2 tolerance on control increments
  int max_iter = 200;
};

/// Clamp a piecewise-constant control into the admissible box.
inline FeFunction project_admissible(FeFunction u, Vec2 lower, Vec2 upper) {
  for (size_t d = 0; d < u.coeffs.size(); ++d) {
    const double lo = d % 2 == 0 ? lower.x : lower.y;
    const double hi = d % 2 == 0 ? upper.x : upper.y;
    u.coeffs[d] = std::min(hi, std::max(lo, u.coeffs[d]));
  }
  return u;
}

/// J = 1/2 |y_h - y_d|^2 + 1/2 |omega_h - omega_d|^2 + gamma/2 |u_h|^2.
inline double cost(const Problem& prob, const FeFunction& y, const FeFunction& omega,
                   const FeFunction& u, int degree = 8) {
  const double track_y = integrate_cells(y.space->mesh(), degree, [&](int c, Vec2 ref, Vec2 phys) {
    const Vec2 d = eval_vec(y, c, ref) - prob.y_d(phys);
    return dot(d, d);
  });
  const double track_w = integrate_cells(y.space->mesh(), degree, [&](int c, Vec2 ref, Vec2 phys) {
    const double d = eval_scalar(omega, c, ref) - prob.omega_d(phys);
    return d * d;
  });
  const double cn = l2_norm_vec(u, degree);
  return 0.5 * track_y + 0.5 * track_w + 0.5 * prob.coeff.gamma * cn * cn;
}

/// Cellwise mean of a velocity-type field (the L2 projection onto piecewise
/// constants), written into a control-space function.
inline FeFunction cell_means(const FeSpace& control, const FeFunction& v, int degree = 8) {
  const Mesh& mesh = control.mesh();
  const TriangleRule rule = triangle_rule(degree);
  FeFunction out(control);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    Vec2 sum{0.0, 0.0};
    for (size_t q = 0; q < rule.points.size(); ++q)
      sum += rule.weights[q] * map.det * eval_vec(v, c, rule.points[q]);
    const Vec2 mean = sum / (0.5 * map.det);
    const int* dofs = control.cell_dofs(c);
    out.coeffs[dofs[0]] = mean.x;
    out.coeffs[dofs[1]] = mean.y;
  }
  return out;
}

/// Worst violation of the cellwise optimality conditions
/// g = P0(w_h) + gamma u: g >= 0 at the lower bound, g <= 0 at the upper
/// bound, g = 0 inside.
inline double vi_residual(const Problem& prob, const FeFunction& w, const FeFunction& u,
                          int degree = 8) {
  const FeSpace& control = *u.space;
  const FeFunction mw = cell_means(control, w, degree);
  double worst = 0.0;
  for (int c = 0; c < control.mesh().n_cells(); ++c) {
    const int* dofs = control.cell_dofs(c);
    for (int comp = 0; comp < 2; ++comp) {
      const double uc = u.coeffs[dofs[comp]];
      const double g = mw.coeffs[dofs[comp]] + prob.coeff.gamma * uc;
      const double lo = comp == 0 ? prob.coeff.lower.x : prob.coeff.lower.y;
      const double hi = comp == 0 ? prob.coeff.upper.x : prob.coeff.upper.y;
      double viol;
      if (uc == lo)
        viol = std::max(0.0, -g);
      else if (uc == hi)
        viol = std::max(0.0, g);
      else
        viol = std::abs(g);
      worst = std::max(worst, viol);
    }
  }
  return worst;
}

/// State and co-state solver with factorizations cached across control
/// updates; the matrices do not depend on the control.
template <class Scheme>
class ControlLoop {
 public:
  ControlLoop(const Scheme& sch, const Problem& prob)
      : sch_(&sch),
        prob_(&prob),
        state_(assemble_system(sch, prob.coeff, false)),
        adjoint_(assemble_system(sch, prob.coeff, true)) {}

  const Scheme& scheme() const { return *sch_; }
  const Problem& problem() const { return *prob_; }

  /// Solve the state system for a given control; fills y, omega, p.
  void solve_state(const FeFunction& u, SolutionBundle& out) {
    const Scheme& s = *sch_;
    std::vector<double> rhs(s.layout.size, 0.0);
    add_vector_load(rhs, s.layout.off_y, s.velocity, s.constrained, s.quad_degree,
                    [&](int c, Vec2 ref, Vec2 phys) { return prob_->f(phys) + eval_vec(u, c, ref); });
    scatter(state_.solve(rhs), out.y, out.omega, out.p, out.state_multiplier);
  }

  /// Solve the co-state system driven by the tracking mismatch of (y, omega).
  void solve_adjoint(const SolutionBundle& state, SolutionBundle& out) {
    const Scheme& s = *sch_;
    std::vector<double> rhs(s.layout.size, 0.0);
    add_vector_load(rhs, s.layout.off_y, s.velocity, s.constrained, s.quad_degree,
                    [&](int c, Vec2 ref, Vec2 phys) { return eval_vec(state.y, c, ref) - prob_->y_d(phys); });
    add_scalar_load(rhs, s.layout.off_w, s.vorticity, s.quad_degree, [&](int c, Vec2 ref, Vec2 phys) {
      return eval_scalar(state.omega, c, ref) - prob_->omega_d(phys);
    });
    scatter(adjoint_.solve(rhs), out.w, out.theta, out.q, out.adjoint_multiplier);
  }

  SolutionBundle make_bundle() const {
    const Scheme& s = *sch_;
    SolutionBundle b{FeFunction(s.velocity), FeFunction(s.vorticity), FeFunction(s.pressure),
                     FeFunction(s.velocity), FeFunction(s.vorticity), FeFunction(s.pressure),
                     FeFunction(s.control)};
    return b;
  }

 private:
  void scatter(const std::vector<double>& x, FeFunction& vel, FeFunction& vort, FeFunction& pres,
               double& multiplier) const {
    const SaddleLayout& lay = sch_->layout;
    std::copy(x.begin(), x.begin() + lay.off_w, vel.coeffs.begin());
    std::copy(x.begin() + lay.off_w, x.begin() + lay.off_p, vort.coeffs.begin());
    std::copy(x.begin() + lay.off_p, x.begin() + lay.off_mu, pres.coeffs.begin());
    multiplier = x[lay.off_mu];
  }

  const Scheme* sch_;
  const Problem* prob_;
  SparseSystem state_, adjoint_;
};

/// One-shot state solve (assembles, solves, discards the factorization).
template <class Scheme>
SolutionBundle solve_state(const Scheme& sch, const Problem& prob, const FeFunction& u) {
  ControlLoop<Scheme> loop(sch, prob);
  SolutionBundle b = loop.make_bundle();
  b.u = u;
  loop.solve_state(u, b);
  return b;
}

/// L2 norm of the difference of two piecewise-constant controls.
inline double control_distance(const FeFunction& a, const FeFunction& b) {
  const FeSpace& control = *a.space;
  double sum = 0.0;
  for (int c = 0; c < control.mesh().n_cells(); ++c) {
    const CellMap map(control.mesh(), c);
    const int* dofs = control.cell_dofs(c);
    const double dx = a.coeffs[dofs[0]] - b.coeffs[dofs[0]];
    const double dy = a.coeffs[dofs[1]] - b.coeffs[dofs[1]];
    sum += 0.5 * map.det * (dx * dx + dy * dy);
  }
  return std::sqrt(sum);
}

/// Damped projected fixed-point iteration
///   u <- clamp((1 - step) u + step * P0(-w_h(u)/gamma)).
/// Accepted steps never increase the cost beyond roundoff slack; on an
/// increase the step is halved down to 1/16 before the iteration gives up.
template <class Scheme>
SolutionBundle fixed_point_solve(const Scheme& sch, const Problem& prob, const FeFunction& u0,
                                 FixedPointOptions opt = {}) {
  ControlLoop<Scheme> loop(sch, prob);
  SolutionBundle bundle = loop.make_bundle();
  bundle.u = project_admissible(u0, prob.coeff.lower, prob.coeff.upper);
  loop.solve_state(bundle.u, bundle);
  bundle.cost = cost(prob, bundle.y, bundle.omega, bundle.u, sch.quad_degree);

  const double gamma = prob.coeff.gamma;
  for (int k = 1; k <= opt.max_iter; ++k) {
    loop.solve_adjoint(bundle, bundle);
    FeFunction target = cell_means(sch.control, bundle.w, sch.quad_degree);
    for (double& c : target.coeffs) c = -c / gamma;

    double step = opt.damping;
    bool accepted = false;
    FeFunction u_next(sch.control);
    SolutionBundle trial = loop.make_bundle();
    while (true) {
      u_next = bundle.u;
      for (size_t d = 0; d < u_next.coeffs.size(); ++d)
        u_next.coeffs[d] = (1.0 - step) * u_next.coeffs[d] + step * target.coeffs[d];
      u_next = project_admissible(u_next, prob.coeff.lower, prob.coeff.upper);
      loop.solve_state(u_next, trial);
      trial.cost = cost(prob, trial.y, trial.omega, u_next, sch.quad_degree);
      if (trial.cost <= bundle.cost + 1e-12 * (1.0 + std::abs(bundle.cost))) {
        accepted = true;
        break;
      }
      if (step <= 1.0 / 16.0) break;
      step *= 0.5;
    }
    if (!accepted) break;  // stalled; previous iterate is the best monotone one

    const double du = control_distance(u_next, bundle.u);
    bundle.y = trial.y;
    bundle.omega = trial.omega;
    bundle.p = trial.p;
    bundle.state_multiplier = trial.state_multiplier;
    bundle.u = u_next;
    bundle.cost = trial.cost;
    bundle.iterations = k;
    bundle.log.push_back({k, du, trial.cost});
    if (du <= opt.tol) {
      bundle.converged = true;
      break;
    }
  }

  loop.solve_adjoint(bundle, bundle);  // final co-state for the certificate
  bundle.vi = vi_residual(prob, bundle.w, bundle.u, sch.quad_degree);
  return bundle;
}

/// Compare the adjoint-based reduced gradient (gamma u + w_h, d) against
/// centered finite differences of the reduced cost in random piecewise-constant
/// directions; returns the worst relative mismatch.
template <class Scheme>
double gradient_check(const Scheme& sch, const Problem& prob, const FeFunction& u,
                      double h_fd = 1e-4, unsigned seed = 1u, int directions = 5) {
  ControlLoop<Scheme> loop(sch, prob);
  SolutionBundle bundle = loop.make_bundle();
  loop.solve_state(u, bundle);
  loop.solve_adjoint(bundle, bundle);
  const FeFunction mw = cell_means(sch.control, bundle.w, sch.quad_degree);

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Mesh& mesh = sch.control.mesh();
  double worst = 0.0;
  SolutionBundle trial = loop.make_bundle();
  for (int d = 0; d < directions; ++d) {
    FeFunction dir(sch.control);
    for (double& c : dir.coeffs) c = unif(gen);
    double exact = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const CellMap map(mesh, c);
      const int* dofs = sch.control.cell_dofs(c);
      for (int comp = 0; comp < 2; ++comp)
        exact += 0.5 * map.det * dir.coeffs[dofs[comp]] *
                 (prob.coeff.gamma * u.coeffs[dofs[comp]] + mw.coeffs[dofs[comp]]);
    }
    double j[2];
    for (int side = 0; side < 2; ++side) {
      FeFunction us = u;
      const double sgn = side == 0 ? 1.0 : -1.0;
      for (size_t i = 0; i < us.coeffs.size(); ++i) us.coeffs[i] += sgn * h_fd * dir.coeffs[i];
      loop.solve_state(us, trial);
      j[side] = cost(prob, trial.y, trial.omega, us, sch.quad_degree);
    }
    const double fd = (j[0] - j[1]) / (2.0 * h_fd);
    worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
  }
  return worst;
}

/// Write the iteration history as CSV.
inline void dump_iteration_log(const SolutionBundle& bundle, std::ostream& out) {
  out << "iter,du_norm,cost\n";
  char line[96];
  for (const IterationRecord& r : bundle.log) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", r.iter, r.du_norm, r.cost);
    out << line;
  }
}

}  // namespace vvp
