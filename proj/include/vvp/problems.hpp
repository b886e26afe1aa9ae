// The example control problems: manufactured smooth/boundary-layer solutions
// and the data-only corner-singularity cases.
//
// The exact velocity fields are curls of scalar stream functions, so they are
// divergence free and vanish on the boundary (streams vanish to second order
// there).  All derivatives come from Jet arithmetic; the data f, y_d, omega_d
// are assembled from the strong forms of the state operator and of the exact
// transpose of the state operator (the discrete adjoint is the transposed
// matrix, so the co-state data must come from the transposed operator for the
// manufactured septuple to be consistent).
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvp/coefficients.hpp"
#include "vvp/geometry.hpp"
#include "vvp/jet.hpp"
#include "vvp/mesh.hpp"

namespace vvp {

/// One control problem: coefficients, data entering the discrete systems and,
/// when available, the exact optimal septuple for error computation.
struct Problem {
  std::string name;
  Domain domain = Domain::unit_square;
  Coefficients coeff;
  double rho1 = 0.0;  ///< augmentation constant the co-state data was built for
  bool has_exact = false;

  std::function<Vec2(Vec2)> f;
  std::function<Vec2(Vec2)> y_d;
  std::function<double(Vec2)> omega_d;

  std::function<Vec2(Vec2)> y, w, u;
  std::function<Mat2(Vec2)> grad_y, grad_w;
  std::function<double(Vec2)> omega, theta, p, q;
};

namespace detail {

/// Velocity-type field derived from a scalar stream function: value, gradient,
/// scalar curl and the curl's gradient.
struct StreamField {
  Vec2 v;
  Mat2 g;
  double curl;
  Vec2 gcurl;
};

inline StreamField stream_field(const Jet& s) {
  StreamField f;
  f.v = {s.dy(), -s.dx()};
  f.g = {s.dxy(), s.dyy(), -s.dxx(), -s.dxy()};
  f.curl = -s.lap();
  f.gcurl = {-(s.dxxx() + s.dxyy()), -(s.dxxy() + s.dyyy())};
  return f;
}

using ScalarJet = std::function<Jet(const Jet&, const Jet&)>;

struct ManufacturedSpec {
  std::string name;
  Domain domain;
  ScalarJet psi, phi;        // state / co-state stream functions
  ScalarJet pressure, copressure;
  ScalarJet viscosity;
  double sigma;
  double gamma;
  Vec2 lower, upper;
  bool beta_is_state;        // transport field equals the exact velocity
  Vec2 beta_const{0.0, 0.0};
  double nu0, nu1;
};

/// All exact quantities at one point.
struct ExactEval {
  StreamField state, costate;
  Vec2 gp, gq;
  double p, q;
  double nu, lap_nu;
  Vec2 gnu;
  Mat2 hnu;
};

inline ExactEval eval_exact(const ManufacturedSpec& s, Vec2 x) {
  const Jet X = Jet::var_x(x.x), Y = Jet::var_y(x.y);
  ExactEval e;
  e.state = stream_field(s.psi(X, Y));
  e.costate = stream_field(s.phi(X, Y));
  const Jet pj = s.pressure(X, Y), qj = s.copressure(X, Y), nj = s.viscosity(X, Y);
  e.p = pj.value();
  e.gp = pj.grad();
  e.q = qj.value();
  e.gq = qj.grad();
  e.nu = nj.value();
  e.gnu = nj.grad();
  e.hnu = nj.hess();
  e.lap_nu = nj.lap();
  return e;
}

inline Problem build_manufactured(const ManufacturedSpec& spec, double rho1) {
  Problem prob;
  prob.name = spec.name;
  prob.domain = spec.domain;
  prob.rho1 = rho1;
  prob.has_exact = true;

  auto eval = [spec](Vec2 x) { return eval_exact(spec, x); };
  auto beta_of = [spec](const ExactEval& e) {
    return spec.beta_is_state ? e.state.v : spec.beta_const;
  };

  prob.coeff.nu = [eval](Vec2 x) { return eval(x).nu; };
  prob.coeff.grad_nu = [eval](Vec2 x) { return eval(x).gnu; };
  prob.coeff.hess_nu = [eval](Vec2 x) { return eval(x).hnu; };
  prob.coeff.beta = [eval, beta_of](Vec2 x) { return beta_of(eval(x)); };
  // the transport field is either constant or an exact stream-function curl
  prob.coeff.div_beta = [](Vec2) { return 0.0; };
  prob.coeff.sigma = [s = spec.sigma](Vec2) { return s; };
  prob.coeff.gamma = spec.gamma;
  prob.coeff.lower = spec.lower;
  prob.coeff.upper = spec.upper;
  prob.coeff.nu0 = spec.nu0;
  prob.coeff.nu1 = spec.nu1;

  const double gamma = spec.gamma, sigma = spec.sigma;
  const Vec2 lo = spec.lower, hi = spec.upper;

  prob.y = [eval](Vec2 x) { return eval(x).state.v; };
  prob.grad_y = [eval](Vec2 x) { return eval(x).state.g; };
  prob.omega = [eval](Vec2 x) { return eval(x).state.curl; };
  prob.w = [eval](Vec2 x) { return eval(x).costate.v; };
  prob.grad_w = [eval](Vec2 x) { return eval(x).costate.g; };
  prob.theta = [eval](Vec2 x) { return eval(x).costate.curl; };
  prob.p = [eval](Vec2 x) { return eval(x).p; };
  prob.q = [eval](Vec2 x) { return eval(x).q; };
  prob.u = [eval, gamma, lo, hi](Vec2 x) {
    return project_box(eval(x).costate.v * (-1.0 / gamma), lo, hi);
  };

  // Strong momentum equation solved for f:
  //   -2 eps(y) grad(nu) + nu curl(omega) + (beta.grad) y + sigma y + grad p = f + u.
  prob.f = [eval, beta_of, gamma, sigma, lo, hi](Vec2 x) {
    const ExactEval e = eval(x);
    const Vec2 u = project_box(e.costate.v * (-1.0 / gamma), lo, hi);
    return sym(e.state.g) * e.gnu * (-2.0) + curl_of_scalar(e.state.gcurl) * e.nu +
           e.state.g * beta_of(e) + e.state.v * sigma + e.gp - u;
  };

  // Transposed-operator momentum row applied to the exact co-state; the
  // viscosity channel uses the integration-by-parts identity
  //   -2 (eps(v) grad nu, w) = (v, lap(nu) w + (grad nu . grad) w + hess(nu) w
  //                                + (div w) grad nu),
  // with div w = 0 for the exact co-state.  Transport transposes to
  // -(beta.grad)w (the fields are divergence free), the curl coupling to
  // -curl(nu theta), and the augmentation to rho1 curl(curl w).
  prob.y_d = [eval, beta_of, sigma, rho1](Vec2 x) {
    const ExactEval e = eval(x);
    const StreamField& w = e.costate;
    const Vec2 curl_nu_theta =
        curl_of_scalar(w.gcurl) * e.nu + curl_of_scalar(e.gnu) * w.curl;
    const Vec2 op = w.v * e.lap_nu + w.g * e.gnu + e.hnu * w.v - curl_nu_theta +
                    w.v * sigma - w.g * beta_of(e) + curl_of_scalar(w.gcurl) * rho1 - e.gq;
    return e.state.v - op;
  };

  // Transposed-operator vorticity row: nu theta + (nu - rho1) curl w
  // + grad(nu) x w, with theta = curl w for the exact co-state.
  prob.omega_d = [eval, rho1](Vec2 x) {
    const ExactEval e = eval(x);
    const double theta = e.costate.curl;
    return e.state.curl -
           (e.nu * theta + (e.nu - rho1) * theta + cross(e.gnu, e.costate.v));
  };

  return prob;
}

inline Problem build_corner(const std::string& name, Domain domain, double rho1) {
  Problem prob;
  prob.name = name;
  prob.domain = domain;
  prob.rho1 = rho1;
  prob.has_exact = false;
  prob.coeff.nu = [](Vec2 x) { return 1.0 + x.x * x.x; };
  prob.coeff.grad_nu = [](Vec2 x) { return Vec2{2.0 * x.x, 0.0}; };
  prob.coeff.hess_nu = [](Vec2) { return Mat2{2.0, 0.0, 0.0, 0.0}; };
  prob.coeff.beta = [](Vec2) { return Vec2{1.0, 1.0}; };
  prob.coeff.div_beta = [](Vec2) { return 0.0; };
  prob.coeff.sigma = [](Vec2) { return 0.0; };
  prob.coeff.gamma = 1.0;
  prob.coeff.lower = {0.0, 0.0};
  prob.coeff.upper = {1.0, 1.0};
  prob.coeff.nu0 = 1.0;
  prob.coeff.nu1 = 2.0;
  prob.f = [](Vec2) { return Vec2{1.0, 1.0}; };
  prob.y_d = [](Vec2 x) { return Vec2{x.y, -x.x}; };
  prob.omega_d = [](Vec2) { return -2.0; };
  return prob;
}

}  // namespace detail

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {"ex51", "ex52", "ex53_l", "ex53_t"};
  return names;
}

/// Build a problem by name.  The co-state data of the manufactured problems
/// depends on the augmentation constant rho1 used by the scheme.
inline Problem make_problem(const std::string& name, double rho1 = 0.0) {
  using detail::ManufacturedSpec;
  const double pi = M_PI;
  if (name == "ex51") {
    ManufacturedSpec spec;
    spec.name = name;
    spec.domain = Domain::unit_square;
    spec.psi = [pi](const Jet& x, const Jet& y) { return sq(sin(pi * x) * sin(pi * y)); };
    spec.phi = [pi](const Jet& x, const Jet& y) {
      return sq(sin(2.0 * pi * x) * sin(2.0 * pi * y));
    };
    spec.pressure = [pi](const Jet& x, const Jet& y) {
      return cos(2.0 * pi * x) * cos(2.0 * pi * y);
    };
    spec.copressure = [pi](const Jet& x, const Jet& y) {
      return sin(2.0 * pi * x) * sin(2.0 * pi * y);
    };
    spec.viscosity = [](const Jet& x, const Jet& y) { return 0.001 + 0.999 * (x * y); };
    spec.sigma = 100.0;
    spec.gamma = 1.0;
    spec.lower = {-0.5, -0.5};
    spec.upper = {0.5, 0.5};
    spec.beta_is_state = true;
    spec.nu0 = 0.001;
    spec.nu1 = 1.0;
    return detail::build_manufactured(spec, rho1);
  }
  if (name == "ex52") {
    ManufacturedSpec spec;
    spec.name = name;
    spec.domain = Domain::unit_triangle;
    // boundary-layer factor: vanishes at 0 and 1, slope about 49 at 0
    auto layer = [](const Jet& t) {
      const double scale = 1.0 - std::exp(-50.0);
      return 1.0 - t - (exp(t * -50.0) - std::exp(-50.0)) / scale;
    };
    spec.psi = [layer](const Jet& x, const Jet& y) {
      return x * sq(y) * sq(1.0 - x - y) * layer(x);
    };
    spec.phi = [layer](const Jet& x, const Jet& y) {
      return sq(x) * y * sq(1.0 - x - y) * layer(y);
    };
    spec.pressure = [pi](const Jet& x, const Jet& y) {
      (void)x;
      return cos(2.0 * pi * y) / 1024.0;
    };
    spec.copressure = [pi](const Jet& x, const Jet& y) {
      (void)y;
      return cos(2.0 * pi * x) / 1024.0;
    };
    spec.viscosity = [](const Jet& x, const Jet& y) { return 1.0 + 0.001 * (x * y); };
    spec.sigma = 100.0;
    spec.gamma = 1.0;
    spec.lower = {0.0, 0.0};
    spec.upper = {0.1, 0.1};
    spec.beta_is_state = false;
    spec.beta_const = {1.0, 1.0};
    spec.nu0 = 1.0;
    spec.nu1 = 1.001;
    return detail::build_manufactured(spec, rho1);
  }
  if (name == "ex53_l") return detail::build_corner(name, Domain::l_shape, rho1);
  if (name == "ex53_t") return detail::build_corner(name, Domain::t_shape, rho1);
  throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace vvp
