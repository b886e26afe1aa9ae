// Gauss quadrature on the reference triangle and the reference edge.
#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vvp/geometry.hpp"

namespace vvp {

/// Quadrature rule on the reference triangle {x >= 0, y >= 0, x + y <= 1}.
/// Weights sum to the reference area 1/2 and are all positive.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// Quadrature rule on the reference edge [0,1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1], exact for polynomials of degree 2m-1.
inline void gauss_legendre01(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev estimate for the i-th root on [-1,1].
    double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - t);  // roots come out descending; order is irrelevant
    w[i] = 1.0 / ((1.0 - t * t) * pp * pp);
  }
}

}  // namespace detail

/// Collapsed-product rule: x = a, y = b(1-a) with (a,b) Gauss points on [0,1]^2
/// and the Jacobian (1-a) folded into the weight.  The (1-a) factor raises the
/// polynomial degree in a by one, hence m = ceil((d+2)/2) points per direction
/// keep the rule exact for total degree d with strictly positive weights.
inline TriangleRule triangle_rule(int degree) {
  if (degree < 1 || degree > 24) throw std::invalid_argument("triangle_rule: degree out of range");
  const int m = (degree + 3) / 2;
  std::vector<double> x, w;
  detail::gauss_legendre01(m, x, w);
  TriangleRule rule;
  rule.exact_degree = degree;
  rule.points.reserve(m * m);
  rule.weights.reserve(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      rule.points.push_back({x[i], x[j] * (1.0 - x[i])});
      rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  return rule;
}

inline EdgeRule edge_rule(int degree) {
  if (degree < 1 || degree > 40) throw std::invalid_argument("edge_rule: degree out of range");
  const int m = (degree + 2) / 2;
  EdgeRule rule;
  rule.exact_degree = degree;
  detail::gauss_legendre01(m, rule.points, rule.weights);
  return rule;
}

}  // namespace vvp
