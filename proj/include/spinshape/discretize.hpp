#pragma once

#include <cmath>
#include <vector>

#include "spinshape/banded.hpp"
#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"
#include "spinshape/grid.hpp"
#include "spinshape/spin.hpp"

namespace spinshape {

// Discrete A- on a node grid, mapping node spinors to link spinors:
//   (A- psi)_{j+1/2} = (psi_{j+1} - psi_j)/h + M(z_{j+1/2}) (psi_{j+1} + psi_j)/2
// for the N-1 interior links. A+ is its exact adjoint under the h-weighted
// inner products, so H- = A+A- and H+ = A-A+ are Gram matrices and share
// their nonzero spectrum exactly.
class FirstOrderOperator {
 public:
  FirstOrderOperator(const Grid& node_grid, const ModelParams& p, const Model& model = {})
      : grid_(node_grid), link_grid_(node_grid.links()), real_(model.frame.is_real()) {
    const MatrixSuperpotential m(p, model);
    link_m_.reserve(link_grid_.size());
    for (int j = 0; j < link_grid_.size(); ++j) link_m_.push_back(m(grid_.link(j)));
  }

  const Grid& node_grid() const { return grid_; }
  const Grid& link_grid() const { return link_grid_; }
  bool is_real() const { return real_; }
  const Mat2& link_matrix(int j) const { return link_m_[j]; }

  // Block of A- coupling link j to node j (left) and node j+1 (right).
  Mat2 left_block(int j) const { return cplx(-1.0 / grid_.spacing()) * Mat2::identity() + cplx(0.5) * link_m_[j]; }
  Mat2 right_block(int j) const { return cplx(1.0 / grid_.spacing()) * Mat2::identity() + cplx(0.5) * link_m_[j]; }

  SpinorField lower(const SpinorField& psi) const {
    if (!(psi.grid() == grid_)) throw GridMismatch("A- expects a field on its node grid");
    SpinorField out(link_grid_);
    const double inv_h = 1.0 / grid_.spacing();
    for (int j = 0; j < link_grid_.size(); ++j) {
      const Spinor a = psi.at(j);
      const Spinor b = psi.at(j + 1);
      const Spinor avg{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
      const Spinor mv = link_m_[j] * avg;
      out.set(j, {(b[0] - a[0]) * inv_h + mv[0], (b[1] - a[1]) * inv_h + mv[1]});
    }
    return out;
  }

  SpinorField raise(const SpinorField& phi) const {
    if (!(phi.grid() == link_grid_)) throw GridMismatch("A+ expects a field on the link grid of its node grid");
    SpinorField out(grid_);
    const double inv_h = 1.0 / grid_.spacing();
    for (int j = 0; j < link_grid_.size(); ++j) {
      // link j contributes adjoint(left_block) to node j and adjoint(right_block) to node j+1
      const Spinor f = phi.at(j);
      const Spinor mf = link_m_[j].adjoint() * f;
      out(j, 0) += -f[0] * inv_h + 0.5 * mf[0];
      out(j, 1) += -f[1] * inv_h + 0.5 * mf[1];
      out(j + 1, 0) += f[0] * inv_h + 0.5 * mf[0];
      out(j + 1, 1) += f[1] * inv_h + 0.5 * mf[1];
    }
    return out;
  }

  SpinorField apply_h_minus(const SpinorField& psi) const { return raise(lower(psi)); }
  SpinorField apply_h_plus(const SpinorField& phi) const { return lower(raise(phi)); }

 private:
  Grid grid_;
  Grid link_grid_;
  bool real_;
  std::vector<Mat2> link_m_;
};

namespace detail {

inline void require_real(const Mat2& m) {
  if (!m.is_real())
    throw DomainError("frame produces complex spin matrices; real band assembly needs a and b in the x-z plane");
}

inline void add_block(BandedSymmetricOperator& h, int row_node, int col_node, const Mat2& blk) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const int i = 2 * row_node + r;
      const int j = 2 * col_node + c;
      if (i >= j) h.add(i, j, blk(r, c).real());
    }
}

}  // namespace detail

// H- = A+A- on the node grid (dimension 2N) or H+ = A-A+ on the link grid
// (dimension 2(N-1)); interleaved (node, spin) ordering, half-bandwidth 3.
inline BandedSymmetricOperator discretize_factorized(const FirstOrderOperator& a, Sector which) {
  const int links = a.link_grid().size();
  for (int j = 0; j < links; ++j) detail::require_real(a.link_matrix(j));
  if (which == Sector::minus) {
    const int n = a.node_grid().size();
    BandedSymmetricOperator h(2 * n, 3);
    for (int j = 0; j < links; ++j) {
      const Mat2 l = a.left_block(j);
      const Mat2 r = a.right_block(j);
      // Blocks are real symmetric, so transposes are the blocks themselves.
      detail::add_block(h, j, j, l * l);
      detail::add_block(h, j + 1, j + 1, r * r);
      detail::add_block(h, j + 1, j, r * l);
    }
    return h;
  }
  BandedSymmetricOperator h(2 * links, 3);
  for (int j = 0; j < links; ++j) {
    const Mat2 l = a.left_block(j);
    const Mat2 r = a.right_block(j);
    detail::add_block(h, j, j, l * l + r * r);
    if (j + 1 < links) detail::add_block(h, j + 1, j, a.left_block(j + 1) * r);
  }
  return h;
}

inline BandedSymmetricOperator discretize_factorized(const ModelParams& p, const Grid& grid, Sector which,
                                                     const Model& model = {}) {
  return discretize_factorized(FirstOrderOperator(grid, p, model), which);
}

struct DirectOptions {
  // Constant added to the scalar potential. Zero for the real model; the CLI
  // uses it to reproduce a misprinted potential constant as a sabotage run.
  double scalar_offset = 0.0;
};

// -d^2/dz^2 by the 3-point stencil (Dirichlet at +-L) plus V+-(z_i) + B+-(z_i).S
// at the nodes. Second-order accurate, independent of the factorized scheme.
inline BandedSymmetricOperator discretize_direct(const ModelParams& p, const Grid& grid, Sector which,
                                                 const Model& model = {}, const DirectOptions& opt = {}) {
  const PartnerFields fields(p, model);
  const int n = grid.size();
  const double h2 = grid.spacing() * grid.spacing();
  BandedSymmetricOperator h(2 * n, 3);
  for (int i = 0; i < n; ++i) {
    const double z = grid.node(i);
    const Vec3 bvec = fields.magnetic_field(which, z);
    const Mat2 zeeman = cplx(0.5) * sigma_dot(bvec);
    detail::require_real(zeeman);
    const double v = fields.scalar_potential(which, z) + opt.scalar_offset;
    const Mat2 diag = cplx(2.0 / h2 + v) * Mat2::identity() + zeeman;
    detail::add_block(h, i, i, diag);
    if (i > 0) detail::add_block(h, i, i - 1, cplx(-1.0 / h2) * Mat2::identity());
  }
  return h;
}

enum class Scheme { factorized, direct };

inline BandedSymmetricOperator discretize(const ModelParams& p, const Grid& grid, Sector which, Scheme scheme,
                                          const Model& model = {}, const DirectOptions& opt = {}) {
  if (scheme == Scheme::direct) return discretize_direct(p, grid, which, model, opt);
  return discretize_factorized(p, grid, which, model);
}

// Dimension of the normalizable kernel: eigenvectors with eigenvalue below
// `cutoff` whose weight within `edge_width` of either box wall stays below
// `edge_tol`. Exact discrete kernel vectors that are pinned to a wall (they
// grow toward it and have no continuum counterpart) are not counted.
// A vector growing toward a wall at rate r keeps a fraction of about
// 1 - exp(-2 r edge_width) there; a bound zero mode decaying at rate k keeps
// about 2 k exp(-2 k L) edge_width. The default tolerance separates the two
// once |r|, |k| exceed a few / L.
inline int normalizable_kernel_dimension(const EigenResult& eig, const Grid& grid, double cutoff,
                                         double edge_width = 1.0, double edge_tol = 1e-2) {
  std::vector<const std::vector<double>*> kernel;
  for (const auto& p : eig.pairs)
    if (p.value < cutoff && !p.vector.empty()) kernel.push_back(&p.vector);
  const int m = static_cast<int>(kernel.size());
  if (m == 0) return 0;
  const double left = grid.left_edge() + edge_width;
  const double right = grid.right_edge() - edge_width;
  std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    const double z = grid.node(i);
    if (z > left && z < right) continue;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int s = 0; s < 2; ++s) gram[a * m + b] += (*kernel[a])[2 * i + s] * (*kernel[b])[2 * i + s];
  }
  const auto ev = small_symmetric_eigenvalues(gram, m);
  int count = 0;
  for (double v : ev)
    if (v < edge_tol) ++count;
  return count;
}

// Kernel cutoff relative to the operator scale.
inline double kernel_cutoff(const BandedSymmetricOperator& h, double rel = 1e-10) { return rel * h.norm_inf(); }

struct NumericLevelCount {
  int kernel = 0;            // normalizable kernel dimension
  int positive = 0;          // eigenvalues in (cutoff, threshold)
  int clusters() const { return (kernel + positive) / 2; }
};

// Eigenvalues of the factorized H- strictly below `threshold`, counted by
// inertia, with the kernel filtered by normalizable_kernel_dimension.
inline NumericLevelCount numeric_level_count(const ModelParams& p, const Grid& grid, double threshold,
                                             const Model& model = {}, const EigenOptions& opt = {}) {
  const auto h = discretize_factorized(p, grid, Sector::minus, model);
  const double cutoff = kernel_cutoff(h);
  NumericLevelCount c;
  const int below_cut = count_eigenvalues_below(h, cutoff, opt);
  c.positive = count_eigenvalues_below(h, threshold, opt) - below_cut;
  if (below_cut > 0) c.kernel = normalizable_kernel_dimension(eigen_lowest(h, below_cut, opt), grid, cutoff);
  return c;
}

}  // namespace spinshape
