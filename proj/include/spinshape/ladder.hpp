#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spinshape/analytic.hpp"
#include "spinshape/discretize.hpp"
#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"
#include "spinshape/grid.hpp"
#include "spinshape/zeromode.hpp"

namespace spinshape {

// A+(params_k) applied to a link-space field: the node grid is the one whose
// links carry psi.
inline SpinorField apply_raising(const SpinorField& psi, const ModelParams& params_k, const Model& model = {}) {
  return FirstOrderOperator(psi.grid().widened(), params_k, model).raise(psi);
}

// Same, with the target node grid stated explicitly.
inline SpinorField apply_raising(const SpinorField& psi, const ModelParams& params_k, const Grid& target,
                                 const Model& model = {}) {
  if (!(target.links() == psi.grid())) throw GridMismatch("A+ input does not live on the links of the target grid");
  return FirstOrderOperator(target, params_k, model).raise(psi);
}

// A-(params_k) applied to a node-space field; the result lives on its links.
inline SpinorField apply_lowering(const SpinorField& psi, const ModelParams& params_k, const Model& model = {}) {
  return FirstOrderOperator(psi.grid(), params_k, model).lower(psi);
}

// <psi, H- psi> / <psi, psi> with the factorized H-(params).
inline double rayleigh_quotient(const SpinorField& psi, const ModelParams& params, const Model& model = {}) {
  const SpinorField a = apply_lowering(psi, params, model);
  return inner_product(a, a).real() / inner_product(psi, psi).real();
}

// Parameters (gamma_k, beta_k) for k = n down to 0.
struct LadderChain {
  std::vector<ModelParams> params_sequence;
  int target_level = 0;
};

inline LadderChain ladder_chain(const ModelParams& params, int n, const SuperpotentialFamily& family = tanh_family()) {
  const auto flow = parameter_flow(params, n, family);
  LadderChain c;
  c.target_level = n;
  for (int k = n; k >= 0; --k) c.params_sequence.push_back(flowed(params, flow[k], k));
  return c;
}

// Applies A+ with each parameter set in turn, first element first.
inline SpinorField raise_through(SpinorField psi, const std::vector<ModelParams>& order, const Model& model = {}) {
  for (const auto& p : order) psi = apply_raising(psi, p, model);
  return psi;
}

struct ExcitedState {
  int n = 0;
  double energy = 0.0;
  std::vector<SpinorField> states;      // orthonormal pair on the input grid
  std::vector<double> rayleigh;         // H- Rayleigh quotient of each state
  std::vector<double> normalization;    // a posteriori C_n of each raw chain output
  double expected_normalization = 1.0;  // product of 1/sqrt(E) factors along the chain
  double gram_determinant = 1.0;
};

// Level n of H-(params): zero modes of H-(gamma_n, beta_n) on the grid with
// n fewer nodes, raised by A+(gamma_{n-1}) ... A+(gamma_0) back to `grid`.
inline ExcitedState build_excited_state(const Grid& grid, const ModelParams& params, int n, const Model& model = {},
                                        double min_gram_determinant = 1e-8) {
  params.validate();
  if (n < 0) throw DomainError("level index must be nonnegative");
  if (model.family.name.rfind("tanh", 0) == 0 && !level_admissible(params.gamma, params.beta, n))
    throw InadmissibleError("level " + std::to_string(n) + " is not a bound state");
  if (n > grid.size() - Grid::kMinPoints) throw DomainError("grid too small for a chain of this length");

  const LadderChain chain = ladder_chain(params, n, model.family);
  const Grid base = Grid::from_spacing(grid.spacing(), grid.size() - n);
  const ZeroModePair zm = zero_mode_pair(base, chain.params_sequence.front(), model);

  ExcitedState out;
  out.n = n;
  out.energy = model.family.name.rfind("tanh", 0) == 0 ? energy_level(params.gamma, params.beta, n) : 0.0;

  const std::vector<ModelParams> order(chain.params_sequence.begin() + 1, chain.params_sequence.end());
  SpinorField u = raise_through(zm.psi_1, order, model);
  SpinorField v = raise_through(zm.psi_2, order, model);
  out.normalization = {1.0 / norm(u), 1.0 / norm(v)};
  u = normalized(u);
  v = normalized(v);

  const cplx overlap = inner_product(u, v);
  out.gram_determinant = 1.0 - std::norm(overlap);
  if (!(out.gram_determinant >= min_gram_determinant))
    throw DegeneracyCollapse("ladder outputs became linearly dependent at level " + std::to_string(n));
  v.axpy(-overlap, u);
  v = normalized(v);
  out.states = {u, v};
  out.rayleigh = {rayleigh_quotient(u, params, model), rayleigh_quotient(v, params, model)};

  // ||A+(gamma_k) chi||^2 = E_{n-k}(gamma_k) ||chi||^2 for an exact level
  // n-k-1 state chi of H-(gamma_{k+1}).
  const auto flow = parameter_flow(params, n, model.family);
  for (int k = 0; k < n; ++k) {
    double e = 0.0;
    for (int j = k + 1; j <= n; ++j) e += flow[j].epsilon;
    out.expected_normalization /= std::sqrt(e);
  }
  return out;
}

}  // namespace spinshape
