#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "spinshape/analytic.hpp"
#include "spinshape/discretize.hpp"
#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"
#include "spinshape/grid.hpp"

namespace spinshape {

// Decay rates of kernel solutions of A- = d/dz + M(z) at each end, taken from
// the eigenvalues mu of the asymptotic matrix M(+-inf): psi ~ exp(-mu z) v.
// At +inf a channel decays with rate mu (needs mu > 0), at -inf with rate -mu.
struct DecayChannel {
  double rate = 0.0;
  Spinor direction{};
};

struct AsymptoticChannels {
  std::array<DecayChannel, 2> plus;   // fast, slow
  std::array<DecayChannel, 2> minus;  // slow, fast
};

inline AsymptoticChannels asymptotic_channels(const ModelParams& params_n, const Model& model = {}) {
  const MatrixSuperpotential m(params_n, model);
  const auto mp = m.asymptote(+1);
  const auto mm = m.asymptote(-1);
  if (!mp || !mm) throw DomainError("superpotential family '" + model.family.name + "' has no finite asymptote");
  const auto ep = eigen_hermitian(*mp);
  const auto em = eigen_hermitian(*mm);
  AsymptoticChannels c;
  c.plus = {DecayChannel{ep.values[1], ep.vectors[1]}, DecayChannel{ep.values[0], ep.vectors[0]}};
  c.minus = {DecayChannel{-em.values[1], em.vectors[1]}, DecayChannel{-em.values[0], em.vectors[0]}};
  if (!(c.plus[1].rate > 0.0) || !(c.minus[0].rate > 0.0))
    throw InadmissibleError("zero mode is not normalizable: need gamma_n > |beta_n|/2");
  return c;
}

struct DecayRates {
  std::array<double, 2> plus_inf{};   // {gamma_n + |beta_n|/2, gamma_n - |beta_n|/2}
  std::array<double, 2> minus_inf{};  // {gamma_n - |beta_n|/2, gamma_n + |beta_n|/2}
};

inline DecayRates asymptotic_decay_rates(double gamma_n, double beta_n) {
  if (!(gamma_n > 0.5 * std::abs(beta_n)))
    throw InadmissibleError("decay rates undefined: gamma_n must exceed |beta_n|/2");
  const double half = 0.5 * std::abs(beta_n);
  return {{gamma_n + half, gamma_n - half}, {gamma_n - half, gamma_n + half}};
}

enum class Integrator {
  rk4,              // classical Runge-Kutta, 4th order in h
  discrete_kernel,  // exact kernel of the discrete A- (trapezoidal recursion)
};

enum class SeedEnd { left, right };
enum class SeedChannel { slow, fast };

struct Seed {
  SeedEnd end = SeedEnd::left;
  SeedChannel channel = SeedChannel::slow;
};

namespace detail {

inline Spinor seed_vector(const AsymptoticChannels& c, Seed s) {
  if (s.end == SeedEnd::left) return s.channel == SeedChannel::slow ? c.minus[0].direction : c.minus[1].direction;
  return s.channel == SeedChannel::slow ? c.plus[1].direction : c.plus[0].direction;
}

inline double spinor_abs(const Spinor& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

// Solves 2x2 complex system a x = b.
inline Spinor solve2(const Mat2& a, const Spinor& b) {
  const cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return {(a(1, 1) * b[0] - a(0, 1) * b[1]) / det, (a(0, 0) * b[1] - a(1, 0) * b[0]) / det};
}

inline Spinor rhs(const MatrixSuperpotential& m, double z, const Spinor& y) {
  const Spinor r = m(z) * y;
  return {-r[0], -r[1]};
}

}  // namespace detail

// Integrates psi' = -M(z) psi across the grid, seeded with an asymptotic
// decay direction at one wall. Left seeds march left to right from z = -L,
// right seeds right to left from z = +L, with step equal to the grid spacing
// so every step lands on a node. Values are rescaled whenever they exceed
// 1e150; the accumulated log factor is kept in log_scale(). Returned field
// has unit grid norm.
inline SpinorField integrate_zero_mode(const Grid& grid, const ModelParams& params_n, Seed seed,
                                       Integrator integrator = Integrator::rk4, const Model& model = {}) {
  params_n.validate();
  const auto channels = asymptotic_channels(params_n, model);
  const MatrixSuperpotential m(params_n, model);
  const int n = grid.size();
  const double h = grid.spacing();
  const bool forward = seed.end == SeedEnd::left;
  const double step = forward ? h : -h;

  SpinorField psi(grid);
  Spinor y = detail::seed_vector(channels, seed);
  double log_scale = 0.0;
  constexpr double kRescale = 1e150;

  auto rescale_if_needed = [&](int filled_from, int filled_to) {
    const double a = detail::spinor_abs(y);
    if (a <= kRescale) return;
    const double f = 1.0 / a;
    y = {y[0] * f, y[1] * f};
    for (int i = filled_from; i <= filled_to; ++i) psi.set(i, {psi(i, 0) * f, psi(i, 1) * f});
    log_scale += std::log(a);
  };

  if (integrator == Integrator::rk4) {
    double z = forward ? grid.left_edge() : grid.right_edge();
    for (int k = 0; k < n; ++k) {
      const Spinor k1 = detail::rhs(m, z, y);
      const Spinor y2{y[0] + 0.5 * step * k1[0], y[1] + 0.5 * step * k1[1]};
      const Spinor k2 = detail::rhs(m, z + 0.5 * step, y2);
      const Spinor y3{y[0] + 0.5 * step * k2[0], y[1] + 0.5 * step * k2[1]};
      const Spinor k3 = detail::rhs(m, z + 0.5 * step, y3);
      const Spinor y4{y[0] + step * k3[0], y[1] + step * k3[1]};
      const Spinor k4 = detail::rhs(m, z + step, y4);
      y = {y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
           y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
      const int node = forward ? k : n - 1 - k;
      z = grid.node(node);
      psi.set(node, y);
      if (forward)
        rescale_if_needed(0, node);
      else
        rescale_if_needed(node, n - 1);
    }
  } else {
    // (A- psi)_{j+1/2} = 0  <=>  (1/h + M/2) psi_{j+1} = (1/h - M/2) psi_j
    const Mat2 id = Mat2::identity();
    const int start = forward ? 0 : n - 1;
    psi.set(start, y);
    for (int k = 1; k < n; ++k) {
      if (forward) {
        const int j = k - 1;  // link between j and j+1
        const Mat2 mj = m(grid.link(j));
        const Mat2 p = cplx(1.0 / h) * id + cplx(0.5) * mj;
        const Mat2 q = cplx(1.0 / h) * id - cplx(0.5) * mj;
        y = detail::solve2(p, q * y);
        psi.set(k, y);
        rescale_if_needed(0, k);
      } else {
        const int j = n - 1 - k;  // link between j and j+1, psi_{j+1} known
        const Mat2 mj = m(grid.link(j));
        const Mat2 p = cplx(1.0 / h) * id + cplx(0.5) * mj;
        const Mat2 q = cplx(1.0 / h) * id - cplx(0.5) * mj;
        y = detail::solve2(q, p * y);
        psi.set(j, y);
        rescale_if_needed(j, n - 1);
      }
    }
  }
  const double nrm = norm(psi);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw SolverError("zero-mode integration underflowed to zero");
  psi *= 1.0 / nrm;
  psi.set_log_scale(log_scale + std::log(nrm));
  return psi;
}

// Sup-norm of (psi' + M psi) at interior nodes, with psi' from an 8th-order
// central difference; divided by sup |psi|. Measures how well a sampled field
// solves the continuum zero-mode equation.
inline double continuum_annihilation_residual(const SpinorField& psi, const ModelParams& p, const Model& model = {}) {
  static constexpr std::array<double, 4> c{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const MatrixSuperpotential m(p, model);
  const Grid& g = psi.grid();
  const double h = g.spacing();
  double worst = 0.0;
  for (int i = 4; i < g.size() - 4; ++i) {
    Spinor d{0.0, 0.0};
    for (int k = 1; k <= 4; ++k)
      for (int s = 0; s < 2; ++s) d[s] += c[k - 1] * (psi(i + k, s) - psi(i - k, s)) / h;
    const Spinor mv = m(g.node(i)) * psi.at(i);
    worst = std::max(worst, std::max(std::abs(d[0] + mv[0]), std::abs(d[1] + mv[1])));
  }
  return worst / psi.max_abs();
}

// Sup-norm of the discrete A- psi divided by sup |psi|.
inline double discrete_annihilation_residual(const SpinorField& psi, const ModelParams& p, const Model& model = {}) {
  const FirstOrderOperator a(psi.grid(), p, model);
  return a.lower(psi).max_abs() / psi.max_abs();
}

// Least-squares slope of log |psi(z)| over nodes with z in [z0, z1].
inline double fitted_log_slope(const SpinorField& psi, double z0, double z1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = 0; i < psi.size(); ++i) {
    const double z = psi.grid().node(i);
    if (z < z0 || z > z1) continue;
    const double a = detail::spinor_abs(psi.at(i));
    if (!(a > 0.0)) continue;
    const double y = std::log(a);
    sx += z;
    sy += y;
    sxx += z * z;
    sxy += z * y;
    ++cnt;
  }
  if (cnt < 2) throw DomainError("fit window contains fewer than two usable nodes");
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

// Decay rate fitted on [L-5, L-1] (side = +1) or [-L+1, -L+5] (side = -1).
inline double fitted_decay_rate(const SpinorField& psi, int side) {
  const double L = psi.grid().half_width();
  if (side > 0) return -fitted_log_slope(psi, L - 5.0, L - 1.0);
  return fitted_log_slope(psi, -L + 1.0, -L + 5.0);
}

struct ZeroModePair {
  SpinorField psi_1;
  SpinorField psi_2;
  // Fitted rates of the two raw seeded solutions:
  // {member 1 at -inf, member 2 at -inf, member 1 at +inf, member 2 at +inf}.
  std::array<double, 4> decay_rates{};
  double residual = 0.0;
  double gram_determinant = 0.0;
};

struct ZeroModeOptions {
  Integrator integrator = Integrator::discrete_kernel;
  double min_gram_determinant = 1e-10;
};

// Orthonormal basis of the two-dimensional kernel of A-(gamma_n, beta_n):
// the solution recessive at -inf (fast seed, marched rightwards) and the one
// recessive at +inf (fast seed, marched leftwards), then Gram-Schmidt.
// Decay rates are reported for the two raw solutions before orthogonalization.
// Two left seeds are not used: the g coupling feeds the faster-growing
// channel, so both left-seeded solutions end up nearly parallel once
// beta_n L is large.
inline ZeroModePair zero_mode_pair(const Grid& grid, const ModelParams& params_n, const Model& model = {},
                                   const ZeroModeOptions& opt = {}) {
  params_n.validate();
  if (model.family.name.rfind("tanh", 0) == 0 && !level_admissible(params_n.gamma, params_n.beta, 0))
    throw InadmissibleError("no normalizable zero mode: gamma_n must exceed |beta_n|/2");
  SpinorField u = integrate_zero_mode(grid, params_n, {SeedEnd::left, SeedChannel::fast}, opt.integrator, model);
  SpinorField v = integrate_zero_mode(grid, params_n, {SeedEnd::right, SeedChannel::fast}, opt.integrator, model);
  cplx overlap = inner_product(u, v);
  if (1.0 - std::norm(overlap) < 0.5) {
    // Nearly reflectionless field: the two recessive solutions almost
    // coincide. Fall back to both left seeds if they do better.
    SpinorField w = integrate_zero_mode(grid, params_n, {SeedEnd::left, SeedChannel::slow}, opt.integrator, model);
    const cplx ow = inner_product(w, u);
    if (std::norm(ow) < std::norm(overlap)) {
      v = w;
      overlap = std::conj(ow);
    }
  }

  ZeroModePair out{u, v, {}, 0.0, 0.0};
  out.decay_rates = {fitted_decay_rate(u, -1), fitted_decay_rate(v, -1), fitted_decay_rate(u, +1),
                     fitted_decay_rate(v, +1)};
  out.gram_determinant = 1.0 - std::norm(overlap);
  if (!(out.gram_determinant >= opt.min_gram_determinant))
    throw DegeneracyCollapse("zero-mode seeds are numerically dependent (Gram determinant " +
                             std::to_string(out.gram_determinant) + "); enlarge the grid");
  v.axpy(-overlap, u);
  out.psi_1 = u;
  out.psi_2 = normalized(v);

  auto residual = [&](const SpinorField& f) {
    return opt.integrator == Integrator::discrete_kernel ? discrete_annihilation_residual(f, params_n, model)
                                                         : continuum_annihilation_residual(f, params_n, model);
  };
  out.residual = std::max(residual(out.psi_1), residual(out.psi_2));
  return out;
}

// Integrates the reduced system phi' = -((g a + beta_n b).sigma/2) phi, the
// zero-mode equation with W removed, from an initial spinor at z0 to every
// node of `grid` (RK4, step h, marching outward in both directions). z0 must
// be a node.
inline SpinorField integrate_reduced_system(const Grid& grid, const ModelParams& params_n, int start_node,
                                            const Spinor& initial, const Model& model = {}) {
  ModelParams reduced = params_n;
  Model no_w = model;
  no_w.family.w = [](double, double) { return 0.0; };
  no_w.family.dw = [](double, double) { return 0.0; };
  const MatrixSuperpotential m(reduced, no_w);
  SpinorField phi(grid);
  phi.set(start_node, initial);
  const double h = grid.spacing();
  for (int dir : {+1, -1}) {
    Spinor y = initial;
    double z = grid.node(start_node);
    const double step = dir * h;
    for (int i = start_node + dir; i >= 0 && i < grid.size(); i += dir) {
      const Spinor k1 = detail::rhs(m, z, y);
      const Spinor k2 = detail::rhs(m, z + 0.5 * step, {y[0] + 0.5 * step * k1[0], y[1] + 0.5 * step * k1[1]});
      const Spinor k3 = detail::rhs(m, z + 0.5 * step, {y[0] + 0.5 * step * k2[0], y[1] + 0.5 * step * k2[1]});
      const Spinor k4 = detail::rhs(m, z + step, {y[0] + step * k3[0], y[1] + step * k3[1]});
      y = {y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
           y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
      z = grid.node(i);
      phi.set(i, y);
    }
  }
  return phi;
}

// phi = psi * exp(+integral W), the W-free part of a zero mode. For the tanh
// family exp(integral gamma_n tanh) = cosh(z)^gamma_n.
inline SpinorField strip_superpotential(const SpinorField& psi, double gamma_n) {
  SpinorField phi = psi;
  for (int i = 0; i < psi.size(); ++i) {
    const double f = std::pow(std::cosh(psi.grid().node(i)), gamma_n);
    phi(i, 0) *= f;
    phi(i, 1) *= f;
  }
  return phi;
}

}  // namespace spinshape
