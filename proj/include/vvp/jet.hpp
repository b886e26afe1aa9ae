// Forward-mode Taylor arithmetic in two variables, truncated at total degree 3.
//
// Manufactured solutions need exact values through third derivatives (the
// strong momentum residuals contain curl(omega) and curl(curl w), i.e. third
// derivatives of the stream functions).  Writing those out by hand for the
// boundary-layer examples is hopeless; instead the closed-form expressions are
// evaluated once in Jet arithmetic and every partial is read off the
// coefficients.  All rules are exact, so the results agree with symbolic
// differentiation to machine precision.
#pragma once

#include <array>
#include <cmath>

#include "vvp/geometry.hpp"

namespace vvp {

/// Truncated bivariate Taylor expansion: coefficients c[ix(i,j)] of dx^i dy^j,
/// i + j <= 3.  Stored as Taylor coefficients, i.e. partials divided by i! j!.
class Jet {
 public:
  static constexpr int kCoeffs = 10;

  Jet() = default;
  explicit Jet(double constant) { c_[0] = constant; }

  /// Seed for the first independent variable at base point value x.
  static Jet var_x(double x) {
    Jet j(x);
    j.c_[ix(1, 0)] = 1.0;
    return j;
  }
  /// Seed for the second independent variable at base point value y.
  static Jet var_y(double y) {
    Jet j(y);
    j.c_[ix(0, 1)] = 1.0;
    return j;
  }

  double value() const { return c_[ix(0, 0)]; }
  double dx() const { return c_[ix(1, 0)]; }
  double dy() const { return c_[ix(0, 1)]; }
  double dxx() const { return 2.0 * c_[ix(2, 0)]; }
  double dxy() const { return c_[ix(1, 1)]; }
  double dyy() const { return 2.0 * c_[ix(0, 2)]; }
  double dxxx() const { return 6.0 * c_[ix(3, 0)]; }
  double dxxy() const { return 2.0 * c_[ix(2, 1)]; }
  double dxyy() const { return 2.0 * c_[ix(1, 2)]; }
  double dyyy() const { return 6.0 * c_[ix(0, 3)]; }

  Vec2 grad() const { return {dx(), dy()}; }
  Mat2 hess() const { return {dxx(), dxy(), dxy(), dyy()}; }
  double lap() const { return dxx() + dyy(); }

  Jet operator-() const {
    Jet r;
    for (int k = 0; k < kCoeffs; ++k) r.c_[k] = -c_[k];
    return r;
  }
  Jet operator+(const Jet& o) const {
    Jet r;
    for (int k = 0; k < kCoeffs; ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
  }
  Jet operator-(const Jet& o) const {
    Jet r;
    for (int k = 0; k < kCoeffs; ++k) r.c_[k] = c_[k] - o.c_[k];
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r;
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; i + j <= 3; ++j) {
        const double a = c_[ix(i, j)];
        if (a == 0.0) continue;
        for (int k = 0; i + k <= 3; ++k)
          for (int l = 0; i + j + k + l <= 3; ++l)
            r.c_[ix(i + k, j + l)] += a * o.c_[ix(k, l)];
      }
    return r;
  }
  Jet operator+(double s) const { Jet r = *this; r.c_[0] += s; return r; }
  Jet operator-(double s) const { Jet r = *this; r.c_[0] -= s; return r; }
  Jet operator*(double s) const {
    Jet r;
    for (int k = 0; k < kCoeffs; ++k) r.c_[k] = c_[k] * s;
    return r;
  }
  Jet operator/(double s) const { return *this * (1.0 / s); }

  friend Jet operator+(double s, const Jet& j) { return j + s; }
  friend Jet operator-(double s, const Jet& j) { return -j + s; }
  friend Jet operator*(double s, const Jet& j) { return j * s; }

  /// Composition with a univariate function given its value and first three
  /// derivatives at this jet's base value.
  Jet compose(double f0, double f1, double f2, double f3) const {
    Jet du = *this;
    du.c_[0] = 0.0;
    const Jet du2 = du * du;
    const Jet du3 = du2 * du;
    Jet r = du * f1 + du2 * (f2 / 2.0) + du3 * (f3 / 6.0);
    r.c_[0] += f0;
    return r;
  }

 private:
  static constexpr int ix(int i, int j) {
    // Graded-lexicographic layout of (i,j), i + j <= 3.
    constexpr int base[4] = {0, 1, 3, 6};
    return base[i + j] + j;
  }
  std::array<double, kCoeffs> c_{};
};

inline Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.compose(s, c, -s, -c);
}
inline Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.compose(c, -s, -c, s);
}
inline Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return u.compose(e, e, e, e);
}
inline Jet sq(const Jet& u) { return u * u; }

}  // namespace vvp
