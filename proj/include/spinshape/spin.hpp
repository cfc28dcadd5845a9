#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "spinshape/error.hpp"

namespace spinshape {

using cplx = std::complex<double>;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

// 2x2 complex matrix, row-major.
struct Mat2 {
  std::array<cplx, 4> m{};

  cplx& operator()(int r, int c) { return m[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return m[2 * r + c]; }

  static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }

  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = a.m[i] + b.m[i];
    return r;
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = a.m[i] - b.m[i];
    return r;
  }
  friend Mat2 operator*(cplx s, const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = s * a.m[i];
    return r;
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    r(0, 0) = a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0);
    r(0, 1) = a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1);
    r(1, 0) = a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0);
    r(1, 1) = a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1);
    return r;
  }

  Mat2 adjoint() const { return Mat2{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}}; }

  bool is_real() const {
    for (const auto& v : m)
      if (v.imag() != 0.0) return false;
    return true;
  }

  double max_abs() const {
    double r = 0.0;
    for (const auto& v : m) r = std::max(r, std::abs(v));
    return r;
  }
};

using Spinor = std::array<cplx, 2>;

inline Spinor operator*(const Mat2& a, const Spinor& v) {
  return {a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]};
}

namespace pauli {
inline Mat2 x() { return Mat2{{0.0, 1.0, 1.0, 0.0}}; }
inline Mat2 y() { return Mat2{{0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0}}; }
inline Mat2 z() { return Mat2{{1.0, 0.0, 0.0, -1.0}}; }
}  // namespace pauli

// n . sigma for a real 3-vector n.
inline Mat2 sigma_dot(Vec3 n) { return cplx(n.x) * pauli::x() + cplx(n.y) * pauli::y() + cplx(n.z) * pauli::z(); }

// Orthonormal pair (a, b): the g(z) profile points along a, the constant
// transverse field along b. Default: a along z, b along x.
struct FrameVectors {
  Vec3 a{0.0, 0.0, 1.0};
  Vec3 b{1.0, 0.0, 0.0};

  void validate(double tol = 1e-12) const {
    if (std::abs(norm(a) - 1.0) > tol || std::abs(norm(b) - 1.0) > tol)
      throw DomainError("frame vectors must have unit length");
    if (std::abs(dot(a, b)) > tol) throw DomainError("frame vectors must be orthogonal");
  }

  // Spin matrices are real iff neither vector has a y component.
  bool is_real() const { return a.y == 0.0 && b.y == 0.0; }

  friend bool operator==(const FrameVectors&, const FrameVectors&) = default;
};

// Eigen-decomposition of a Hermitian 2x2 matrix; values ascending, vectors
// as columns with unit norm.
struct HermitianEigen2 {
  std::array<double, 2> values{};
  std::array<Spinor, 2> vectors{};
};

inline HermitianEigen2 eigen_hermitian(const Mat2& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const cplx b = h(0, 1);
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double rad = std::hypot(half, std::abs(b));
  HermitianEigen2 out;
  out.values = {mean - rad, mean + rad};
  if (std::abs(b) == 0.0) {
    if (a <= d) {
      out.vectors = {Spinor{1.0, 0.0}, Spinor{0.0, 1.0}};
    } else {
      out.vectors = {Spinor{0.0, 1.0}, Spinor{1.0, 0.0}};
    }
    return out;
  }
  for (int k = 0; k < 2; ++k) {
    // (a - l) v0 + b v1 = 0  ->  v = (b, l - a)
    Spinor v{b, out.values[k] - a};
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    out.vectors[k] = {v[0] / n, v[1] / n};
  }
  return out;
}

}  // namespace spinshape
