// Variable problem coefficients and the well-posedness margin report.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "vvp/geometry.hpp"
#include "vvp/mesh.hpp"
#include "vvp/quadrature.hpp"

namespace vvp {

/// Physical data of one control problem: viscosity (with gradient), transport
/// field (with divergence), reaction, control cost and the admissible box.
struct Coefficients {
  std::function<double(Vec2)> nu;
  std::function<Vec2(Vec2)> grad_nu;
  std::function<Mat2(Vec2)> hess_nu;  ///< second derivatives, used by the co-state operator
  std::function<Vec2(Vec2)> beta;
  std::function<double(Vec2)> div_beta;
  std::function<double(Vec2)> sigma;
  double gamma = 1.0;
  Vec2 lower{0.0, 0.0};  ///< componentwise lower control bound
  Vec2 upper{0.0, 0.0};  ///< componentwise upper control bound
  double nu0 = 0.0;      ///< documented lower viscosity bound
  double nu1 = 0.0;      ///< documented upper viscosity bound
};

/// Componentwise projection onto the admissible box [lower, upper].
inline Vec2 project_box(Vec2 v, Vec2 lower, Vec2 upper) {
  return {std::clamp(v.x, lower.x, upper.x), std::clamp(v.y, lower.y, upper.y)};
}

/// Sampled coefficient ranges and the sufficient-condition margins.  The
/// conditions guarantee coercivity of the symmetrized operator; they are
/// sufficient only, so violations are reported as warnings, not errors.
struct AssumptionReport {
  double nu_min = 0.0, nu_max = 0.0;
  double grad_nu_inf = 0.0;
  double sigma_min = 0.0, sigma_max = 0.0;
  double div_beta_l2 = 0.0;
  double reaction_margin = 0.0;   ///< sigma_min - 9 |grad nu|^2 / nu_min
  double transport_margin = 0.0;  ///< min(reaction_margin, nu_min/12) - C * |div beta|
  bool reaction_ok = false;
  bool transport_ok = false;
  std::string summary;
};

/// Sample the coefficients over the mesh (quadrature points and vertices) and
/// report the margins of the sufficient coercivity conditions.  The embedding
/// constant for the transport smallness condition is not computable from the
/// data; `embedding_constant` = 1 by default and is stated in the report.
inline AssumptionReport check_assumptions(const Mesh& mesh, const Coefficients& c,
                                          double embedding_constant = 1.0) {
  AssumptionReport r;
  r.nu_min = r.sigma_min = std::numeric_limits<double>::infinity();
  r.nu_max = r.sigma_max = -std::numeric_limits<double>::infinity();
  const TriangleRule rule = triangle_rule(6);
  double div2 = 0.0;
  auto visit = [&](Vec2 p, double w) {
    const double nu = c.nu(p), sg = c.sigma(p);
    r.nu_min = std::min(r.nu_min, nu);
    r.nu_max = std::max(r.nu_max, nu);
    r.sigma_min = std::min(r.sigma_min, sg);
    r.sigma_max = std::max(r.sigma_max, sg);
    r.grad_nu_inf = std::max(r.grad_nu_inf, norm(c.grad_nu(p)));
    const double db = c.div_beta(p);
    div2 += w * db * db;
  };
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto pts = mesh.cell_points(cell);
    const double det = 2.0 * mesh.cell_area(cell);
    for (int i = 0; i < 3; ++i) visit(pts[i], 0.0);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2 ref = rule.points[k];
      const Vec2 p = pts[0] + (pts[1] - pts[0]) * ref.x + (pts[2] - pts[0]) * ref.y;
      visit(p, rule.weights[k] * det);
    }
  }
  r.div_beta_l2 = std::sqrt(div2);
  r.reaction_margin = r.sigma_min - 9.0 * r.grad_nu_inf * r.grad_nu_inf / r.nu_min;
  r.reaction_ok = r.reaction_margin > 0.0;
  const double cap = std::min(r.reaction_margin, r.nu_min / 12.0);
  r.transport_margin = cap - embedding_constant * r.div_beta_l2;
  r.transport_ok = r.reaction_ok && r.transport_margin > 0.0;

  std::ostringstream out;
  out << "coefficient ranges: nu in [" << r.nu_min << ", " << r.nu_max << "], |grad nu|_inf = "
      << r.grad_nu_inf << ", sigma in [" << r.sigma_min << ", " << r.sigma_max
      << "], |div beta|_0 = " << r.div_beta_l2 << "\n";
  out << "reaction condition sigma_min >= 9|grad nu|^2/nu_min: margin = " << r.reaction_margin
      << (r.reaction_ok ? " (ok)" : " (WARNING: violated; condition is sufficient, not necessary)")
      << "\n";
  out << "transport smallness (embedding constant " << embedding_constant
      << "): margin = " << r.transport_margin
      << (r.transport_ok ? " (ok)" : " (WARNING: violated; condition is sufficient, not necessary)")
      << "\n";
  r.summary = out.str();
  return r;
}

}  // namespace vvp
