// Small fixed-size vector/matrix types used throughout the library.
#pragma once

#include <array>
#include <cmath>

namespace vvp {

struct Vec2 {
  double x = 0.0, y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// 2D cross product a x b = a1 b2 - a2 b1 (scalar).
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
/// Counterclockwise rotation by 90 degrees; maps an outward normal to the tangent.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

/// 2x2 matrix, row-major; a(i,j) = row i, column j.
struct Mat2 {
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  constexpr Mat2() = default;
  constexpr Mat2(double m00, double m01, double m10, double m11)
      : a00(m00), a01(m01), a10(m10), a11(m11) {}

  constexpr Vec2 operator*(Vec2 v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
  constexpr Mat2 operator+(Mat2 o) const { return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11}; }
  constexpr Mat2 operator-(Mat2 o) const { return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11}; }
  constexpr Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  constexpr Mat2 operator*(Mat2 o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  constexpr Mat2 transpose() const { return {a00, a10, a01, a11}; }
  constexpr double det() const { return a00 * a11 - a01 * a10; }
  constexpr double trace() const { return a00 + a11; }
  Mat2 inverse() const {
    const double d = det();
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
  }
};

constexpr Mat2 operator*(double s, Mat2 m) { return m * s; }

/// Symmetric part (strain-rate when applied to a velocity gradient).
constexpr Mat2 sym(Mat2 g) {
  return {g.a00, 0.5 * (g.a01 + g.a10), 0.5 * (g.a01 + g.a10), g.a11};
}

/// Frobenius inner product A:B.
constexpr double ddot(Mat2 a, Mat2 b) {
  return a.a00 * b.a00 + a.a01 * b.a01 + a.a10 * b.a10 + a.a11 * b.a11;
}

/// Scalar curl of a vector field from its gradient G(i,j) = d_j v_i.
constexpr double curl_from_grad(Mat2 g) { return g.a10 - g.a01; }
/// Divergence of a vector field from its gradient.
constexpr double div_from_grad(Mat2 g) { return g.a00 + g.a11; }
/// Vector curl of a scalar field s from its gradient: curl(s) = (ds/dy, -ds/dx).
constexpr Vec2 curl_of_scalar(Vec2 grad_s) { return {grad_s.y, -grad_s.x}; }

}  // namespace vvp
