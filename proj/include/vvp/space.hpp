// Finite element spaces on triangle meshes.
//
// Scalar reference bases: P1 hats, P1 plus the cubic cell bubble (the MINI
// enrichment), and nodal Lagrange lattices of arbitrary small degree used by
// the discontinuous spaces.  Vector-valued spaces interleave the two
// components per scalar basis function.  Degrees of freedom are numbered
// vertices first, then cell bubbles (MINI); discontinuous dofs are blocked
// per cell in cell order.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vvp/geometry.hpp"
#include "vvp/mesh.hpp"
#include "vvp/quadrature.hpp"

namespace vvp {

enum class SpaceKind {
  mini_velocity,    ///< (P1 + bubble)^2, continuous, zero trace on the boundary
  lagrange_scalar,  ///< continuous P1 scalar (pressure, continuous vorticity)
  dg_scalar,        ///< discontinuous P_m scalar
  dg_vector,        ///< discontinuous (P_m)^2
  const_vector      ///< piecewise constant vectors (controls)
};

namespace detail {

/// Invert a small dense row-major matrix by Gauss-Jordan with partial pivoting.
inline std::vector<double> invert_dense(std::vector<double> a, int n) {
  std::vector<double> inv(n * n, 0.0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) throw std::runtime_error("invert_dense: singular matrix");
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[piv * n + c], a[col * n + c]);
        std::swap(inv[piv * n + c], inv[col * n + c]);
      }
    const double d = a[col * n + col];
    for (int c = 0; c < n; ++c) {
      a[col * n + c] /= d;
      inv[col * n + c] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

}  // namespace detail

inline const char* space_kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::mini_velocity: return "mini_velocity";
    case SpaceKind::lagrange_scalar: return "lagrange_scalar";
    case SpaceKind::dg_scalar: return "dg_scalar";
    case SpaceKind::dg_vector: return "dg_vector";
    case SpaceKind::const_vector: return "const_vector";
  }
  return "?";
}

/// Scalar basis on the reference triangle; evaluates values and reference
/// gradients at a point.
class RefBasis {
 public:
  enum class Type { p1, p1_bubble, lattice };

  static RefBasis p1() { return RefBasis(Type::p1, 1, 3); }
  static RefBasis p1_bubble() { return RefBasis(Type::p1_bubble, 3, 4); }

  /// Nodal Lagrange basis on the degree-m lattice (m = 0 gives the constant).
  static RefBasis lattice(int m) {
    if (m < 0 || m > 4) throw std::invalid_argument("RefBasis: unsupported degree");
    const int n = (m + 1) * (m + 2) / 2;
    RefBasis basis(Type::lattice, m, n);
    if (m == 0) return basis;
    basis.nodes_.reserve(n);
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i + j <= m; ++i)
        basis.nodes_.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
    // Invert the monomial Vandermonde so each basis function is nodal.
    std::vector<double> vd(n * n);
    for (int r = 0; r < n; ++r) {
      int c = 0;
      for (int d = 0; d <= m; ++d)
        for (int b = 0; b <= d; ++b, ++c)
          vd[r * n + c] = std::pow(basis.nodes_[r].x, d - b) * std::pow(basis.nodes_[r].y, b);
    }
    basis.coeff_ = detail::invert_dense(vd, n);
    return basis;
  }

  int size() const { return n_; }
  int degree() const { return degree_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  /// Evaluate values and optionally reference gradients and Hessians; grad
  /// and hess may be null, hess receives a symmetric Mat2 per basis function.
  void eval(Vec2 p, double* val, Vec2* grad, Mat2* hess = nullptr) const {
    const double l0 = 1.0 - p.x - p.y, l1 = p.x, l2 = p.y;
    switch (type_) {
      case Type::p1:
      case Type::p1_bubble: {
        val[0] = l0;
        val[1] = l1;
        val[2] = l2;
        if (grad) {
          grad[0] = {-1.0, -1.0};
          grad[1] = {1.0, 0.0};
          grad[2] = {0.0, 1.0};
        }
        if (hess) hess[0] = hess[1] = hess[2] = Mat2{0.0, 0.0, 0.0, 0.0};
        if (type_ == Type::p1_bubble) {
          val[3] = 27.0 * l0 * l1 * l2;
          if (grad)
            grad[3] = 27.0 * (l1 * l2 * Vec2{-1.0, -1.0} + l0 * l2 * Vec2{1.0, 0.0} + l0 * l1 * Vec2{0.0, 1.0});
          if (hess) {
            const double mixed = 27.0 * (1.0 - 2.0 * p.x - 2.0 * p.y);
            hess[3] = Mat2{-54.0 * p.y, mixed, mixed, -54.0 * p.x};
          }
        }
        return;
      }
      case Type::lattice: {
        const int m = degree_;
        if (m == 0) {
          val[0] = 1.0;
          if (grad) grad[0] = {0.0, 0.0};
          if (hess) hess[0] = Mat2{0.0, 0.0, 0.0, 0.0};
          return;
        }
        // Monomial powers and their derivatives at p, graded ordering.
        for (int k = 0; k < n_; ++k) {
          val[k] = 0.0;
          if (grad) grad[k] = {0.0, 0.0};
          if (hess) hess[k] = Mat2{0.0, 0.0, 0.0, 0.0};
        }
        int c = 0;
        for (int d = 0; d <= m; ++d)
          for (int b = 0; b <= d; ++b, ++c) {
            const int a = d - b;
            const double xa = std::pow(p.x, a), yb = std::pow(p.y, b);
            const double mono = xa * yb;
            const double dx = a == 0 ? 0.0 : a * std::pow(p.x, a - 1) * yb;
            const double dy = b == 0 ? 0.0 : b * xa * std::pow(p.y, b - 1);
            const double dxx = a < 2 ? 0.0 : a * (a - 1) * std::pow(p.x, a - 2) * yb;
            const double dyy = b < 2 ? 0.0 : b * (b - 1) * xa * std::pow(p.y, b - 2);
            const double dxy =
                (a == 0 || b == 0) ? 0.0 : a * b * std::pow(p.x, a - 1) * std::pow(p.y, b - 1);
            for (int k = 0; k < n_; ++k) {
              const double w = coeff_[c * n_ + k];
              val[k] += w * mono;
              if (grad) grad[k] += w * Vec2{dx, dy};
              if (hess) hess[k] = hess[k] + w * Mat2{dxx, dxy, dxy, dyy};
            }
          }
        return;
      }
    }
  }

 private:
  RefBasis(Type t, int degree, int n) : type_(t), degree_(degree), n_(n) {}

  Type type_;
  int degree_;
  int n_;
  std::vector<Vec2> nodes_;
  std::vector<double> coeff_;  // lattice only: monomial-to-nodal map
};

/// A finite element space bound to a mesh: reference basis, dof numbering and
/// the homogeneous Dirichlet mask (velocity spaces constrain all boundary
/// vertex dofs; bubbles are interior by construction).
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, SpaceKind kind, int degree = 1)
      : mesh_(&mesh), kind_(kind), degree_(degree), basis_(make_basis(kind, degree)) {
    components_ = (kind == SpaceKind::mini_velocity || kind == SpaceKind::dg_vector ||
                   kind == SpaceKind::const_vector)
                      ? 2
                      : 1;
    local_scalar_ = basis_.size();
    local_size_ = local_scalar_ * components_;
    build_dofs();
  }

  const Mesh& mesh() const { return *mesh_; }
  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int ndofs() const { return ndofs_; }
  int local_scalar() const { return local_scalar_; }
  int local_size() const { return local_size_; }
  const RefBasis& ref_basis() const { return basis_; }

  /// Global dof of local (scalar basis function, component) on a cell; local
  /// dof order interleaves components: 2*i + c for vector spaces.
  const int* cell_dofs(int cell) const { return &cell_dofs_[static_cast<size_t>(cell) * local_size_]; }

  bool constrained(int dof) const { return !constrained_.empty() && constrained_[dof]; }
  int n_constrained() const {
    int n = 0;
    for (bool b : constrained_) n += b ? 1 : 0;
    return n;
  }

 private:
  static RefBasis make_basis(SpaceKind kind, int degree) {
    switch (kind) {
      case SpaceKind::mini_velocity:
        if (degree != 1) throw std::invalid_argument("mini_velocity requires degree 1");
        return RefBasis::p1_bubble();
      case SpaceKind::lagrange_scalar:
        if (degree != 1) throw std::invalid_argument("lagrange_scalar supports degree 1 only");
        return RefBasis::p1();
      case SpaceKind::dg_scalar:
      case SpaceKind::dg_vector:
        return RefBasis::lattice(degree);
      case SpaceKind::const_vector:
        return RefBasis::lattice(0);
    }
    throw std::invalid_argument("unknown space kind");
  }

  void build_dofs() {
    const Mesh& m = *mesh_;
    cell_dofs_.assign(static_cast<size_t>(m.n_cells()) * local_size_, -1);
    auto at = [&](int c, int i) -> int& { return cell_dofs_[static_cast<size_t>(c) * local_size_ + i]; };
    switch (kind_) {
      case SpaceKind::mini_velocity: {
        ndofs_ = 2 * (m.n_vertices() + m.n_cells());
        for (int c = 0; c < m.n_cells(); ++c) {
          for (int a = 0; a < 3; ++a)
            for (int comp = 0; comp < 2; ++comp) at(c, 2 * a + comp) = 2 * m.cells[c].v[a] + comp;
          for (int comp = 0; comp < 2; ++comp) at(c, 6 + comp) = 2 * (m.n_vertices() + c) + comp;
        }
        constrained_.assign(ndofs_, false);
        for (int v = 0; v < m.n_vertices(); ++v)
          if (m.boundary_vertex[v]) constrained_[2 * v] = constrained_[2 * v + 1] = true;
        break;
      }
      case SpaceKind::lagrange_scalar: {
        ndofs_ = m.n_vertices();
        for (int c = 0; c < m.n_cells(); ++c)
          for (int a = 0; a < 3; ++a) at(c, a) = m.cells[c].v[a];
        break;
      }
      case SpaceKind::dg_scalar:
      case SpaceKind::dg_vector:
      case SpaceKind::const_vector: {
        ndofs_ = m.n_cells() * local_size_;
        for (int c = 0; c < m.n_cells(); ++c)
          for (int i = 0; i < local_size_; ++i) at(c, i) = c * local_size_ + i;
        break;
      }
    }
  }

  const Mesh* mesh_;
  SpaceKind kind_;
  int degree_;
  int components_;
  int local_scalar_ = 0;
  int local_size_ = 0;
  int ndofs_ = 0;
  RefBasis basis_;
  std::vector<int> cell_dofs_;
  std::vector<bool> constrained_;
};

/// Coefficient vector over an FeSpace.
struct FeFunction {
  const FeSpace* space = nullptr;
  std::vector<double> coeffs;

  explicit FeFunction(const FeSpace& s) : space(&s), coeffs(s.ndofs(), 0.0) {}
};

/// Affine reference-to-physical map of a cell.
struct CellMap {
  Vec2 p0;
  Mat2 jac;      // columns are the edge vectors from p0
  Mat2 jac_inv_t;
  double det;    // = 2 * area

  explicit CellMap(const Mesh& mesh, int cell) {
    const auto p = mesh.cell_points(cell);
    p0 = p[0];
    jac = {p[1].x - p[0].x, p[2].x - p[0].x, p[1].y - p[0].y, p[2].y - p[0].y};
    det = jac.det();
    jac_inv_t = jac.inverse().transpose();
  }

  Vec2 to_physical(Vec2 ref) const { return p0 + jac * ref; }
  Vec2 to_reference(Vec2 phys) const { return jac.inverse() * (phys - p0); }
  Vec2 grad_to_physical(Vec2 gref) const { return jac_inv_t * gref; }
  /// Hessian pushforward for the affine map: H_phys = J^-T H_ref J^-1.
  Mat2 hess_to_physical(Mat2 href) const { return jac_inv_t * href * jac_inv_t.transpose(); }
};

/// Scalar basis data of one cell at a set of reference points (values and
/// physical gradients), the workhorse of assembly and error integration.
struct CellBasis {
  int n = 0;
  std::vector<double> val;   // [point][fn]
  std::vector<Vec2> grad;    // [point][fn]

  CellBasis(const FeSpace& space, const CellMap& map, const std::vector<Vec2>& ref_points) {
    n = space.local_scalar();
    const size_t q = ref_points.size();
    val.resize(q * n);
    grad.resize(q * n);
    std::vector<Vec2> gref(n);
    for (size_t k = 0; k < q; ++k) {
      space.ref_basis().eval(ref_points[k], &val[k * n], gref.data());
      for (int i = 0; i < n; ++i) grad[k * n + i] = map.grad_to_physical(gref[i]);
    }
  }
};

/// Evaluate a scalar FE function at a reference point of a cell.
inline double eval_scalar(const FeFunction& f, int cell, Vec2 ref, Vec2* grad_out = nullptr) {
  const FeSpace& s = *f.space;
  assert(s.components() == 1);
  const int n = s.local_scalar();
  std::vector<double> val(n);
  std::vector<Vec2> gref(n);
  s.ref_basis().eval(ref, val.data(), gref.data());
  const CellMap map(s.mesh(), cell);
  const int* dofs = s.cell_dofs(cell);
  double v = 0.0;
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const double c = f.coeffs[dofs[i]];
    v += c * val[i];
    g += c * map.grad_to_physical(gref[i]);
  }
  if (grad_out) *grad_out = g;
  return v;
}

/// Evaluate a vector FE function at a reference point; optionally returns the
/// physical gradient G(i,j) = d_j v_i.
inline Vec2 eval_vec(const FeFunction& f, int cell, Vec2 ref, Mat2* grad_out = nullptr) {
  const FeSpace& s = *f.space;
  assert(s.components() == 2);
  const int n = s.local_scalar();
  std::vector<double> val(n);
  std::vector<Vec2> gref(n);
  s.ref_basis().eval(ref, val.data(), gref.data());
  const CellMap map(s.mesh(), cell);
  const int* dofs = s.cell_dofs(cell);
  Vec2 v{0.0, 0.0};
  Mat2 g;
  for (int i = 0; i < n; ++i) {
    const Vec2 gp = map.grad_to_physical(gref[i]);
    const double cx = f.coeffs[dofs[2 * i]], cy = f.coeffs[dofs[2 * i + 1]];
    v += {cx * val[i], cy * val[i]};
    g.a00 += cx * gp.x;
    g.a01 += cx * gp.y;
    g.a10 += cy * gp.x;
    g.a11 += cy * gp.y;
  }
  if (grad_out) *grad_out = g;
  return v;
}

/// Evaluate the componentwise physical Hessians of a vector FE function at a
/// reference point of a cell (h0 for the x component, h1 for the y component).
inline void eval_vec_second(const FeFunction& f, int cell, Vec2 ref, Mat2& h0, Mat2& h1) {
  const FeSpace& s = *f.space;
  assert(s.components() == 2);
  const int n = s.local_scalar();
  std::vector<double> val(n);
  std::vector<Vec2> gref(n);
  std::vector<Mat2> href(n);
  s.ref_basis().eval(ref, val.data(), gref.data(), href.data());
  const CellMap map(s.mesh(), cell);
  const int* dofs = s.cell_dofs(cell);
  h0 = h1 = Mat2{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const Mat2 hp = map.hess_to_physical(href[i]);
    h0 = h0 + f.coeffs[dofs[2 * i]] * hp;
    h1 = h1 + f.coeffs[dofs[2 * i + 1]] * hp;
  }
}

/// Locate the cell containing a physical point (brute force; testing aid).
inline int locate_cell(const Mesh& mesh, Vec2 p, Vec2* ref_out = nullptr) {
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    const Vec2 r = map.to_reference(p);
    const double tol = 1e-12;
    if (r.x >= -tol && r.y >= -tol && r.x + r.y <= 1.0 + tol) {
      if (ref_out) *ref_out = r;
      return c;
    }
  }
  return -1;
}

namespace detail {

/// Inverse of the reference-cell mass matrix of a scalar basis.  On affine
/// cells the physical mass matrix is det * M_ref, so one inverse serves every
/// cell of the mesh.
inline std::vector<double> ref_mass_inverse(const RefBasis& basis, const TriangleRule& rule) {
  const int n = basis.size();
  std::vector<double> mass(static_cast<size_t>(n) * n, 0.0), val(n);
  std::vector<Vec2> grad(n);
  for (size_t k = 0; k < rule.points.size(); ++k) {
    basis.eval(rule.points[k], val.data(), grad.data());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mass[i * n + j] += rule.weights[k] * val[i] * val[j];
  }
  return invert_dense(std::move(mass), n);
}

}  // namespace detail

/// Interpolation: nodal at the vertices for the continuous kinds (bubble
/// coefficients zero), cellwise L2 projection for the discontinuous kinds
/// (which reduces to cell means for piecewise constants).
inline FeFunction interpolate(const FeSpace& space, const std::function<double(Vec2)>& f) {
  if (space.components() != 1) throw std::invalid_argument("interpolate: scalar function on vector space");
  FeFunction out(space);
  const Mesh& mesh = space.mesh();
  if (space.kind() == SpaceKind::lagrange_scalar) {
    for (int v = 0; v < mesh.n_vertices(); ++v) out.coeffs[v] = f(mesh.vertices[v]);
    return out;
  }
  const int n = space.local_scalar();
  const TriangleRule rule = triangle_rule(2 * space.degree() + 6);
  const std::vector<double> mass_inv = detail::ref_mass_inverse(space.ref_basis(), rule);
  std::vector<double> val(n), rhs(n);
  std::vector<Vec2> grad(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      space.ref_basis().eval(rule.points[k], val.data(), grad.data());
      const double wf = rule.weights[k] * f(map.to_physical(rule.points[k]));
      for (int i = 0; i < n; ++i) rhs[i] += wf * val[i];
    }
    const int* dofs = space.cell_dofs(c);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += mass_inv[i * n + j] * rhs[j];
      out.coeffs[dofs[i]] = s;
    }
  }
  return out;
}

inline FeFunction interpolate_vec(const FeSpace& space, const std::function<Vec2(Vec2)>& f) {
  if (space.components() != 2) throw std::invalid_argument("interpolate_vec: vector function on scalar space");
  FeFunction out(space);
  const Mesh& mesh = space.mesh();
  if (space.kind() == SpaceKind::mini_velocity) {
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      const Vec2 y = f(mesh.vertices[v]);
      out.coeffs[2 * v] = y.x;
      out.coeffs[2 * v + 1] = y.y;
    }
    return out;  // bubble coefficients stay zero
  }
  const int n = space.local_scalar();
  const TriangleRule rule = triangle_rule(2 * space.degree() + 6);
  const std::vector<double> mass_inv = detail::ref_mass_inverse(space.ref_basis(), rule);
  std::vector<double> val(n);
  std::vector<Vec2> grad(n), rhs(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    std::fill(rhs.begin(), rhs.end(), Vec2{0.0, 0.0});
    for (size_t k = 0; k < rule.points.size(); ++k) {
      space.ref_basis().eval(rule.points[k], val.data(), grad.data());
      const Vec2 wf = rule.weights[k] * f(map.to_physical(rule.points[k]));
      for (int i = 0; i < n; ++i) rhs[i] += val[i] * wf;
    }
    const int* dofs = space.cell_dofs(c);
    for (int i = 0; i < n; ++i) {
      Vec2 s{0.0, 0.0};
      for (int j = 0; j < n; ++j) s += mass_inv[i * n + j] * rhs[j];
      out.coeffs[dofs[2 * i]] = s.x;
      out.coeffs[dofs[2 * i + 1]] = s.y;
    }
  }
  return out;
}

/// Plain-text dump of a coefficient vector with its space tag.
inline void dump_field(const FeFunction& f, std::ostream& out) {
  out << "vvpfield 1\n"
      << space_kind_name(f.space->kind()) << ' ' << f.space->degree() << ' ' << f.space->ndofs() << '\n';
  char buf[40];
  for (double c : f.coeffs) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", c);
    out << buf;
  }
}

}  // namespace vvp
