#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spinshape/error.hpp"
#include "spinshape/spin.hpp"

namespace spinshape {

// Uniform grid of `points` interior nodes on (-L, L) with spacing
// h = 2L/(N+1). Node i (0-based) sits at z_i = (2i + 1 - N) h/2, so the node
// set is mirror symmetric bit-for-bit: z_{N-1-i} == -z_i exactly.
//
// The links (midpoints between neighbouring nodes) form another grid with the
// same spacing and N-1 points; `links()` returns it. Discrete first-order
// operators map node grids to their link grids.
class Grid {
 public:
  static constexpr int kMinPoints = 16;

  // User-facing constructor; enforces N >= 16 and L > 0.
  static Grid from_half_width(double half_width, int points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw ConfigError("grid.half_width", "must be a positive finite number");
    if (points < kMinPoints)
      throw ConfigError("grid.points", "must be at least " + std::to_string(kMinPoints));
    return Grid(2.0 * half_width / (points + 1), points);
  }

  // Grid with an explicit spacing. Used for derived (link) grids, which may
  // be smaller than kMinPoints.
  static Grid from_spacing(double spacing, int points) {
    if (!(spacing > 0.0) || points < 1) throw DomainError("grid needs positive spacing and at least one point");
    return Grid(spacing, points);
  }

  int size() const { return points_; }
  double spacing() const { return h_; }
  double half_width() const { return 0.5 * (points_ + 1) * h_; }

  double node(int i) const { return (2 * i + 1 - points_) * (0.5 * h_); }
  // Midpoint between node j and node j+1.
  double link(int j) const { return (2 * j + 2 - points_) * (0.5 * h_); }

  // Fictitious boundary nodes at -L and +L.
  double left_edge() const { return node(-1); }
  double right_edge() const { return node(points_); }

  Grid links() const {
    if (points_ < 2) throw DomainError("a grid with one node has no links");
    return Grid(h_, points_ - 1);
  }
  // Inverse of links(): the grid whose link grid is *this.
  Grid widened() const { return Grid(h_, points_ + 1); }

  int mirror(int i) const { return points_ - 1 - i; }

  std::vector<double> nodes() const {
    std::vector<double> z(points_);
    for (int i = 0; i < points_; ++i) z[i] = node(i);
    return z;
  }

  friend bool operator==(const Grid& a, const Grid& b) { return a.h_ == b.h_ && a.points_ == b.points_; }

 private:
  Grid(double h, int n) : h_(h), points_(n) {}

  double h_;
  int points_;
};

// Two-component complex field sampled on the nodes of a grid. Storage is
// interleaved: values[2*i + s] is component s at node i.
class SpinorField {
 public:
  explicit SpinorField(Grid grid) : grid_(grid), values_(2 * static_cast<std::size_t>(grid.size())) {}
  SpinorField(Grid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != 2 * static_cast<std::size_t>(grid_.size()))
      throw GridMismatch("spinor storage does not match grid size");
  }

  // Lifts a real interleaved vector (e.g. an eigenvector) to a field.
  static SpinorField from_real(Grid grid, std::span<const double> v) {
    SpinorField f(grid);
    if (v.size() != f.values_.size()) throw GridMismatch("vector length does not match grid size");
    for (std::size_t k = 0; k < v.size(); ++k) f.values_[k] = v[k];
    return f;
  }

  const Grid& grid() const { return grid_; }
  int size() const { return grid_.size(); }

  cplx& operator()(int i, int s) { return values_[2 * static_cast<std::size_t>(i) + s]; }
  const cplx& operator()(int i, int s) const { return values_[2 * static_cast<std::size_t>(i) + s]; }

  Spinor at(int i) const { return {(*this)(i, 0), (*this)(i, 1)}; }
  void set(int i, const Spinor& v) {
    (*this)(i, 0) = v[0];
    (*this)(i, 1) = v[1];
  }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  // log of the factor removed by mid-integration rescaling; 0 unless the
  // field came out of an integrator that had to renormalize.
  double log_scale() const { return log_scale_; }
  void set_log_scale(double s) { log_scale_ = s; }

  double max_abs() const {
    double r = 0.0;
    for (const auto& v : values_) r = std::max(r, std::abs(v));
    return r;
  }

  SpinorField& operator*=(cplx s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  SpinorField& operator+=(const SpinorField& o) {
    check_same_grid(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  SpinorField& operator-=(const SpinorField& o) {
    check_same_grid(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  // this += s * o
  void axpy(cplx s, const SpinorField& o) {
    check_same_grid(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
  }

  friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
  friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
  friend SpinorField operator*(cplx s, SpinorField a) { return a *= s; }

  void check_same_grid(const SpinorField& o) const {
    if (!(grid_ == o.grid_)) throw GridMismatch("spinor fields live on different grids");
  }

 private:
  Grid grid_;
  std::vector<cplx> values_;
  double log_scale_ = 0.0;
};

// <phi, psi> = h * sum_i (conj(phi_i1) psi_i1 + conj(phi_i2) psi_i2)
inline cplx inner_product(const SpinorField& phi, const SpinorField& psi) {
  phi.check_same_grid(psi);
  cplx acc = 0.0;
  const auto a = phi.values();
  const auto b = psi.values();
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return phi.grid().spacing() * acc;
}

inline double norm(const SpinorField& psi) { return std::sqrt(std::max(0.0, inner_product(psi, psi).real())); }

inline SpinorField normalized(SpinorField psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw SolverError("cannot normalize a zero or non-finite field");
  psi *= 1.0 / n;
  return psi;
}

}  // namespace spinshape
