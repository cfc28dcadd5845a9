#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spinshape/banded.hpp"
#include "spinshape/discretize.hpp"
#include "spinshape/fields.hpp"
#include "spinshape/grid.hpp"

namespace spinshape {

// (T psi)(z) = sigma_y psi(-z) = (-i psi_2(-z), i psi_1(-z)). Reflection is an
// index permutation; grids are mirror symmetric by construction.
inline SpinorField apply_T(const SpinorField& psi) {
  const cplx i(0.0, 1.0);
  SpinorField out(psi.grid());
  for (int k = 0; k < psi.size(); ++k) {
    const int m = psi.grid().mirror(k);
    out.set(k, {-i * psi(m, 1), i * psi(m, 0)});
  }
  return out;
}

inline SpinorField apply_R(const SpinorField& psi) {
  SpinorField out(psi.grid());
  for (int k = 0; k < psi.size(); ++k) out.set(k, {std::conj(psi(k, 0)), std::conj(psi(k, 1))});
  return out;
}

// Element of the four-component space of H = diag(H+, H-): the upper pair
// lives on links (H+ sector), the lower pair on nodes (H- sector).
struct SuperField {
  SpinorField upper;
  SpinorField lower;
};

// Q+ (u, l) = (A- l, 0),  Q- (u, l) = (0, A+ u)
inline SuperField apply_Q_plus(const FirstOrderOperator& a, const SuperField& f) {
  return {a.lower(f.lower), SpinorField(a.node_grid())};
}
inline SuperField apply_Q_minus(const FirstOrderOperator& a, const SuperField& f) {
  return {SpinorField(a.link_grid()), a.raise(f.upper)};
}
inline SuperField apply_H(const FirstOrderOperator& a, const SuperField& f) {
  return {a.apply_h_plus(f.upper), a.apply_h_minus(f.lower)};
}

struct AlgebraReport {
  double anticommutator_TA = 0.0;  // {T, A-} and {T, A+}
  double anticommutator_TR = 0.0;
  double commutator_RA = 0.0;
  double commutator_TH = 0.0;  // [T, H-] and [T, H+]
  double commutator_RH = 0.0;
  double supercharge_anticommutator = 0.0;  // {Q+, Q-} - H
  double supercharge_square = 0.0;          // max of (Q+)^2, (Q-)^2
  double supercharge_commutator = 0.0;      // [Q+-, H]
  double scale = 1.0;                       // ||H|| on the probe set

  double max_residual() const {
    return std::max({anticommutator_TA, anticommutator_TR, commutator_RA, commutator_TH, commutator_RH,
                     supercharge_anticommutator, supercharge_square, supercharge_commutator});
  }
  bool passed(double rel_threshold = 1e-12) const { return max_residual() < rel_threshold * scale; }
};

// Smooth localized probes with mixed spin orientation and phase.
inline std::vector<SpinorField> probe_fields(const Grid& grid) {
  const std::vector<double> centres{-3.0, -1.0, 0.0, 0.7, 2.5};
  const std::vector<Spinor> spins{{1.0, 0.0}, {0.0, 1.0}, {cplx(1.0, 0.0), cplx(0.0, 1.0)}, {cplx(0.6, 0.2), -0.8}};
  std::vector<SpinorField> out;
  int idx = 0;
  for (double c : centres)
    for (const auto& s : spins) {
      SpinorField f(grid);
      const double k = 0.5 * (idx++ % 3);
      for (int i = 0; i < grid.size(); ++i) {
        const double z = grid.node(i);
        const cplx env = std::exp(-(z - c) * (z - c)) * std::exp(cplx(0.0, k * z));
        f.set(i, {env * s[0], env * s[1]});
      }
      out.push_back(f);
    }
  return out;
}

namespace detail {
inline double sup_ratio(const SpinorField& r, const SpinorField& probe) { return r.max_abs() / probe.max_abs(); }
inline double sup_ratio(const SuperField& r, const SuperField& probe) {
  return std::max(r.upper.max_abs(), r.lower.max_abs()) / std::max(probe.upper.max_abs(), probe.lower.max_abs());
}
}  // namespace detail

// Evaluates every relation on a probe basis with the discrete first-order
// operators. Residuals are sup-norms relative to the probe, in the same units
// as `scale`.
inline AlgebraReport algebra_check(const ModelParams& params, const Grid& grid, const Model& model = {}) {
  const FirstOrderOperator a(grid, params, model);
  AlgebraReport r;
  r.scale = 0.0;
  const auto node_probes = probe_fields(grid);
  const auto link_probes = probe_fields(a.link_grid());

  for (std::size_t p = 0; p < node_probes.size(); ++p) {
    const SpinorField& l = node_probes[p];
    const SpinorField& u = link_probes[p];

    const SpinorField hl = a.apply_h_minus(l);
    const SpinorField hu = a.apply_h_plus(u);
    r.scale = std::max({r.scale, detail::sup_ratio(hl, l), detail::sup_ratio(hu, u)});

    r.anticommutator_TA = std::max({r.anticommutator_TA, detail::sup_ratio(apply_T(a.lower(l)) + a.lower(apply_T(l)), l),
                                    detail::sup_ratio(apply_T(a.raise(u)) + a.raise(apply_T(u)), u)});
    r.anticommutator_TR = std::max(r.anticommutator_TR, detail::sup_ratio(apply_T(apply_R(l)) + apply_R(apply_T(l)), l));
    r.commutator_RA = std::max({r.commutator_RA, detail::sup_ratio(apply_R(a.lower(l)) - a.lower(apply_R(l)), l),
                                detail::sup_ratio(apply_R(a.raise(u)) - a.raise(apply_R(u)), u)});
    r.commutator_TH = std::max({r.commutator_TH, detail::sup_ratio(apply_T(hl) - a.apply_h_minus(apply_T(l)), l),
                                detail::sup_ratio(apply_T(hu) - a.apply_h_plus(apply_T(u)), u)});
    r.commutator_RH = std::max({r.commutator_RH, detail::sup_ratio(apply_R(hl) - a.apply_h_minus(apply_R(l)), l),
                                detail::sup_ratio(apply_R(hu) - a.apply_h_plus(apply_R(u)), u)});

    const SuperField f{u, l};
    const SuperField qp = apply_Q_plus(a, f);
    const SuperField qm = apply_Q_minus(a, f);
    const SuperField qpqm = apply_Q_plus(a, qm);
    const SuperField qmqp = apply_Q_minus(a, qp);
    const SuperField hf = apply_H(a, f);
    const SuperField anti{qpqm.upper + qmqp.upper - hf.upper, qpqm.lower + qmqp.lower - hf.lower};
    r.supercharge_anticommutator = std::max(r.supercharge_anticommutator, detail::sup_ratio(anti, f));
    r.supercharge_square = std::max({r.supercharge_square, detail::sup_ratio(apply_Q_plus(a, qp), f),
                                     detail::sup_ratio(apply_Q_minus(a, qm), f)});
    const SuperField qph = apply_Q_plus(a, hf);
    const SuperField hqp = apply_H(a, qp);
    const SuperField qmh = apply_Q_minus(a, hf);
    const SuperField hqm = apply_H(a, qm);
    r.supercharge_commutator =
        std::max({r.supercharge_commutator,
                  detail::sup_ratio(SuperField{qph.upper - hqp.upper, qph.lower - hqp.lower}, f),
                  detail::sup_ratio(SuperField{qmh.upper - hqm.upper, qmh.lower - hqm.lower}, f)});
  }
  return r;
}

struct EigenCluster {
  double value = 0.0;  // mean
  int multiplicity = 0;
  double spread = 0.0;  // max - min
};

// Groups sorted eigenvalues below `threshold` into clusters whose consecutive
// gaps are below pair_tol * max(1, |E|).
inline std::vector<EigenCluster> degeneracy_report(std::vector<double> eigenvalues, double threshold, double pair_tol) {
  std::sort(eigenvalues.begin(), eigenvalues.end());
  std::vector<EigenCluster> out;
  double first = 0.0, last = 0.0, sum = 0.0;
  for (double e : eigenvalues) {
    if (!(e < threshold)) break;
    if (!out.empty() && e - last < pair_tol * std::max(1.0, std::abs(e))) {
      auto& c = out.back();
      ++c.multiplicity;
      sum += e;
      c.value = sum / c.multiplicity;
      c.spread = e - first;
    } else {
      out.push_back({e, 1, 0.0});
      first = e;
      sum = e;
    }
    last = e;
  }
  return out;
}

// Block-diagonal diag(H+, H-) as one banded operator, link space first. Only
// meant for small grids; the fourfold check normally concatenates spectra.
inline BandedSymmetricOperator full_hamiltonian(const FirstOrderOperator& a) {
  const auto hp = discretize_factorized(a, Sector::plus);
  const auto hm = discretize_factorized(a, Sector::minus);
  const int np = hp.dimension();
  const int b = hp.half_bandwidth();
  BandedSymmetricOperator h(np + hm.dimension(), b);
  for (int i = 0; i < np; ++i)
    for (int d = 0; d <= std::min(b, i); ++d) h.lower(i, d) = hp.lower(i, d);
  for (int i = 0; i < hm.dimension(); ++i)
    for (int d = 0; d <= std::min(b, i); ++d) h.lower(np + i, d) = hm.lower(i, d);
  return h;
}

}  // namespace spinshape
