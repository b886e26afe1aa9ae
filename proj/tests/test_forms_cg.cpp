#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>

#include "vvp/forms_cg.hpp"
#include "vvp/norms.hpp"
#include "vvp/problems.hpp"

using namespace vvp;

namespace {

struct CgSolution {
  FeFunction y, w, p;
  std::vector<double> raw;
};

CgSolution solve_state(const CgScheme& sch, const Problem& prob) {
  SparseSystem sys = assemble_cg(sch, prob.coeff);
  std::vector<double> rhs(sch.layout.size, 0.0);
  add_vector_load(rhs, sch.layout.off_y, sch.velocity, sch.constrained, 8,
                  [&](int, Vec2, Vec2 phys) { return prob.f(phys) + prob.u(phys); });
  CgSolution out{FeFunction(sch.velocity), FeFunction(sch.vorticity), FeFunction(sch.pressure), {}};
  out.raw = sys.solve(rhs);
  std::copy(out.raw.begin(), out.raw.begin() + sch.velocity.ndofs(), out.y.coeffs.begin());
  std::copy(out.raw.begin() + sch.layout.off_w, out.raw.begin() + sch.layout.off_p,
            out.w.coeffs.begin());
  std::copy(out.raw.begin() + sch.layout.off_p, out.raw.begin() + sch.layout.off_mu,
            out.p.coeffs.begin());
  return out;
}

CgSolution solve_adjoint(const CgScheme& sch, const Problem& prob, const CgSolution& state) {
  SparseSystem sys = assemble_cg(sch, prob.coeff, true);
  std::vector<double> rhs(sch.layout.size, 0.0);
  add_vector_load(rhs, sch.layout.off_y, sch.velocity, sch.constrained, 8,
                  [&](int c, Vec2 ref, Vec2 phys) { return eval_vec(state.y, c, ref) - prob.y_d(phys); });
  add_scalar_load(rhs, sch.layout.off_w, sch.vorticity, 8, [&](int c, Vec2 ref, Vec2 phys) {
    return eval_scalar(state.w, c, ref) - prob.omega_d(phys);
  });
  CgSolution out{FeFunction(sch.velocity), FeFunction(sch.vorticity), FeFunction(sch.pressure), {}};
  out.raw = sys.solve(rhs);
  std::copy(out.raw.begin(), out.raw.begin() + sch.velocity.ndofs(), out.y.coeffs.begin());
  std::copy(out.raw.begin() + sch.layout.off_w, out.raw.begin() + sch.layout.off_p,
            out.w.coeffs.begin());
  std::copy(out.raw.begin() + sch.layout.off_p, out.raw.begin() + sch.layout.off_mu,
            out.p.coeffs.begin());
  return out;
}

}  // namespace

TEST_CASE("coupled layout counts velocity, vorticity, pressure and multiplier") {
  const Mesh mesh = generate(Domain::unit_square, 3);  // 25 vertices, 32 cells
  const CgScheme sch(mesh, 0.0, 0.0);
  CHECK(sch.layout.off_w == 2 * (25 + 32));
  CHECK(sch.layout.off_p == sch.layout.off_w + 25);
  CHECK(sch.layout.off_mu == sch.layout.off_p + 25);
  CHECK(sch.layout.size == 165);
  CHECK(sch.control.ndofs() == 64);
  int fixed = 0;
  for (char c : sch.constrained) fixed += c;
  CHECK(fixed == 2 * 16);  // boundary vertices only; bubbles stay free
}

TEST_CASE("adjoint matrix is the exact transpose with negated pressure column") {
  const Mesh mesh = generate(Domain::unit_square, 2);
  const CgScheme sch(mesh, 0.5, 0.25);
  const Problem prob = make_problem("ex51");
  SparseSystem state = assemble_cg(sch, prob.coeff);
  SparseSystem adjoint = assemble_cg(sch, prob.coeff, true);
  const Eigen::MatrixXd S(state.matrix());
  const Eigen::MatrixXd A(adjoint.matrix());
  const int np = sch.layout.off_p, nmu = sch.layout.off_mu;
  for (int i = 0; i < sch.layout.size; ++i) {
    for (int j = 0; j < sch.layout.size; ++j) {
      if (i < np && j < np) {
        CHECK(A(i, j) == S(j, i));  // velocity-vorticity block transposes bitwise
      } else if (i < np && j >= np && j < nmu) {
        CHECK(A(i, j) == -S(i, j));  // pressure column flips sign
      } else {
        CHECK(A(i, j) == S(i, j));  // pressure rows and border unchanged
      }
    }
  }
}

TEST_CASE("velocity rows annihilate the constant pressure direction") {
  const Mesh mesh = generate(Domain::unit_square, 3);
  const CgScheme sch(mesh, 0.1, 0.1);
  const Problem prob = make_problem("ex51");
  SparseSystem sys = assemble_cg(sch, prob.coeff);
  std::vector<double> pc(sch.layout.size, 0.0);
  for (int d = sch.layout.off_p; d < sch.layout.off_mu; ++d) pc[d] = 1.0;
  const std::vector<double> out = sys.apply(pc);
  for (int d = 0; d < sch.layout.off_p; ++d) CHECK(std::abs(out[d]) <= 1e-12);
  CHECK_THAT(out[sch.layout.off_mu], Catch::Matchers::WithinRel(1.0, 1e-12));  // domain area
}

TEST_CASE("velocity-vorticity block is coercive in a benign regime") {
  const Problem prob = make_problem("ex52");  // nu near one, sigma = 100
  for (int level : {2, 3}) {
    const Mesh mesh = generate(Domain::unit_triangle, level);
    const CgScheme sch(mesh, 2.0 / 3.0, 0.1);
    SparseSystem sys = assemble_cg(sch, prob.coeff);
    const Eigen::MatrixXd D(sys.matrix());
    std::vector<int> free;
    for (int d = 0; d < sch.layout.off_p; ++d)
      if (!sch.constrained[d]) free.push_back(d);
    Eigen::MatrixXd sub(free.size(), free.size());
    for (size_t i = 0; i < free.size(); ++i)
      for (size_t j = 0; j < free.size(); ++j) sub(i, j) = D(free[i], free[j]);
    const Eigen::MatrixXd sym = 0.5 * (sub + sub.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    CAPTURE(level, eig.eigenvalues().minCoeff());
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("state solve satisfies constraints and converges on the smooth problem") {
  const double rho1 = 2.0 * 0.001 / 3.0, rho2 = 0.1 * 0.001;
  const Problem prob = make_problem("ex51", rho1);
  std::vector<double> ey, ew, ep, etriple;
  for (int level = 2; level <= 5; ++level) {
    const Mesh mesh = generate(prob.domain, level);
    const CgScheme sch(mesh, rho1, rho2);
    const CgSolution sol = solve_state(sch, prob);
    for (int d = 0; d < sch.velocity.ndofs(); ++d)
      if (sch.velocity.constrained(d)) CHECK(sol.y.coeffs[d] == 0.0);
    CHECK(std::abs(mean_value(sol.p)) <= 1e-12);
    ey.push_back(l2_error_vec(sol.y, prob.y));
    ew.push_back(l2_error_scalar(sol.w, prob.omega));
    ep.push_back(l2_error_scalar(sol.p, prob.p));
    etriple.push_back(std::sqrt(triple_error_sq_vec(sol.y, prob.y, prob.grad_y, 8)));
  }
  // velocity roughly second order once resolved; others decrease steadily
  CHECK(ey[2] / ey[3] > 2.2);
  CHECK(ey[1] / ey[2] > 2.5);
  CHECK(ep[1] / ep[2] > 2.0);
  CHECK(ew[2] / ew[3] > 2.0);
  CHECK(etriple[2] < etriple[1]);
  CHECK(etriple[3] < etriple[2]);
}

TEST_CASE("adjoint solve tracks the exact co-state") {
  const double rho1 = 2.0 * 0.001 / 3.0, rho2 = 0.1 * 0.001;
  const Problem prob = make_problem("ex51", rho1);
  std::vector<double> eW, eT, eQ;
  for (int level = 3; level <= 5; ++level) {
    const Mesh mesh = generate(prob.domain, level);
    const CgScheme sch(mesh, rho1, rho2);
    const CgSolution state = solve_state(sch, prob);
    const CgSolution adj = solve_adjoint(sch, prob, state);
    CHECK(std::abs(mean_value(adj.p)) <= 1e-12);
    eW.push_back(l2_error_vec(adj.y, prob.w));
    eT.push_back(l2_error_scalar(adj.w, prob.theta));
    eQ.push_back(l2_error_scalar(adj.p, prob.q));
  }
  CHECK(eW[2] < 0.5 * eW[0]);
  CHECK(eT[2] < 0.5 * eT[0]);
  CHECK(eQ[2] < eQ[0]);
}

TEST_CASE("boundary-layer problem still yields decreasing velocity error") {
  const Problem prob = make_problem("ex52", 2.0 / 3.0);
  double prev = 0.0;
  for (int level = 2; level <= 4; ++level) {
    const Mesh mesh = generate(prob.domain, level);
    const CgScheme sch(mesh, 2.0 / 3.0, 0.1);
    const CgSolution sol = solve_state(sch, prob);
    const double e = l2_error_vec(sol.y, prob.y);
    if (level > 2) CHECK(e < prev);
    prev = e;
  }
}
