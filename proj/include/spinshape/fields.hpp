#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spinshape/error.hpp"
#include "spinshape/grid.hpp"
#include "spinshape/spin.hpp"

namespace spinshape {

// Parameter record of the model: superpotential strength gamma, transverse
// field strength beta, amplitude of the g(z) profile, and a level index.
struct ModelParams {
  double gamma = 2.5;
  double beta = 1.0;
  double field_lambda = 1.0;
  int level = 0;

  void validate() const {
    if (!std::isfinite(gamma) || !std::isfinite(beta) || !std::isfinite(field_lambda))
      throw DomainError("model parameters must be finite");
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    if (level < 0) throw DomainError("level index must be nonnegative");
  }
};

// A shape-invariant family W(z; gamma) = gamma f(z) together with its g(z)
// profile and the parameter step gamma_k -> gamma_{k+1}.
//
// New families plug in here: supply W, W', g, g', the step and the scalar part
// of the factorization energy. `w_limit` returns lim_{z->+-inf} W when it is
// finite; zero-mode construction needs it.
struct SuperpotentialFamily {
  std::string name;
  std::function<double(double z, double gamma)> w;
  std::function<double(double z, double gamma)> dw;
  std::function<double(double z, double amplitude)> g;
  std::function<double(double z, double amplitude)> dg;
  std::function<double(double gamma)> step;
  // W^2(gamma_prev) + W'(gamma_prev) - W^2(gamma_next) + W'(gamma_next), a
  // z-independent constant for a shape-invariant family.
  std::function<double(double gamma_prev, double gamma_next)> scalar_gap;
  std::function<std::optional<double>(double gamma, int side)> w_limit;
};

inline double superpotential_case2(double z, double gamma) {
  if (!std::isfinite(z)) throw DomainError("superpotential evaluated at non-finite z");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return gamma * std::tanh(z);
}

inline double superpotential_case2_derivative(double z, double gamma) {
  if (!std::isfinite(z)) throw DomainError("superpotential evaluated at non-finite z");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const double c = std::cosh(z);
  return gamma / (c * c);
}

// lambda / cosh(z). Does not depend on gamma or beta.
inline double g_profile(double z, double lambda) { return lambda / std::cosh(z); }

inline double g_profile_derivative(double z, double lambda) { return -lambda * std::tanh(z) / std::cosh(z); }

// W = gamma tanh(z), g = lambda / cosh(z), gamma_1 = gamma - 1.
inline SuperpotentialFamily tanh_family() {
  SuperpotentialFamily f;
  f.name = "tanh";
  f.w = [](double z, double gamma) { return gamma * std::tanh(z); };
  f.dw = [](double z, double gamma) {
    const double c = std::cosh(z);
    return gamma / (c * c);
  };
  f.g = g_profile;
  f.dg = g_profile_derivative;
  f.step = [](double gamma) { return gamma - 1.0; };
  f.scalar_gap = [](double gp, double gn) { return gp * gp - gn * gn; };
  f.w_limit = [](double gamma, int side) -> std::optional<double> { return side > 0 ? gamma : -gamma; };
  return f;
}

// W = gamma z with a constant g: the field never changes direction and the
// flow is trivial (gamma_1 = gamma, factorization energy 2 gamma).
inline SuperpotentialFamily linear_family() {
  SuperpotentialFamily f;
  f.name = "linear";
  f.w = [](double z, double gamma) { return gamma * z; };
  f.dw = [](double, double gamma) { return gamma; };
  f.g = [](double, double amplitude) { return amplitude; };
  f.dg = [](double, double) { return 0.0; };
  f.step = [](double gamma) { return gamma; };
  f.scalar_gap = [](double gp, double gn) { return gp + gn; };
  f.w_limit = [](double, int) -> std::optional<double> { return std::nullopt; };
  return f;
}

// The tanh family translated by `shift`. Same spectrum, but W is no longer
// odd about the grid centre; used to break the parity-based symmetry.
inline SuperpotentialFamily shifted_tanh_family(double shift) {
  SuperpotentialFamily f = tanh_family();
  f.name = "tanh-shifted";
  f.w = [shift](double z, double gamma) { return gamma * std::tanh(z - shift); };
  f.dw = [shift](double z, double gamma) {
    const double c = std::cosh(z - shift);
    return gamma / (c * c);
  };
  f.g = [shift](double z, double a) { return g_profile(z - shift, a); };
  f.dg = [shift](double z, double a) { return g_profile_derivative(z - shift, a); };
  return f;
}

// Family, frame and parameters that fully determine the first-order
// operators A+- = -+ d/dz + M(z).
struct Model {
  SuperpotentialFamily family = tanh_family();
  FrameVectors frame{};
};

// M(z) = W(z) 1 + (g(z) a + beta b) . sigma / 2
class MatrixSuperpotential {
 public:
  MatrixSuperpotential(const ModelParams& p, const Model& model = {})
      : family_(model.family),
        gamma_(p.gamma),
        beta_(p.beta),
        lambda_(p.field_lambda),
        a_sigma_(sigma_dot(model.frame.a)),
        b_sigma_(sigma_dot(model.frame.b)),
        real_(model.frame.is_real()) {
    model.frame.validate();
  }

  Mat2 operator()(double z) const {
    return cplx(family_.w(z, gamma_)) * Mat2::identity() + cplx(0.5 * family_.g(z, lambda_)) * a_sigma_ +
           cplx(0.5 * beta_) * b_sigma_;
  }

  Mat2 derivative(double z) const {
    return cplx(family_.dw(z, gamma_)) * Mat2::identity() + cplx(0.5 * family_.dg(z, lambda_)) * a_sigma_;
  }

  // Limit of M(z) as z -> +inf (side = +1) or -inf (side = -1), if finite.
  std::optional<Mat2> asymptote(int side) const {
    const auto wl = family_.w_limit(gamma_, side);
    if (!wl) return std::nullopt;
    const double gl = family_.g(side * 1e3, lambda_);
    return cplx(*wl) * Mat2::identity() + cplx(0.5 * gl) * a_sigma_ + cplx(0.5 * beta_) * b_sigma_;
  }

  bool is_real() const { return real_; }
  double gamma() const { return gamma_; }
  double beta() const { return beta_; }

 private:
  SuperpotentialFamily family_;
  double gamma_;
  double beta_;
  double lambda_;
  Mat2 a_sigma_;
  Mat2 b_sigma_;
  bool real_;
};

enum class Sector { minus, plus };

inline const char* to_string(Sector s) { return s == Sector::minus ? "minus" : "plus"; }

// Scalar potentials and magnetic fields of the partner Hamiltonians
//   H+- = -d^2/dz^2 + V+-(z) + B+-(z) . S
// built from V+- = W^2 +- W' + |V|^2/4 and B+- = 2 W V +- V', where
// V = g(z) a + beta b.
class PartnerFields {
 public:
  PartnerFields(const ModelParams& p, const Model& model = {})
      : family_(model.family), frame_(model.frame), gamma_(p.gamma), beta_(p.beta), lambda_(p.field_lambda) {
    frame_.validate();
  }

  double scalar_potential(Sector s, double z) const {
    const double w = family_.w(z, gamma_);
    const double dw = family_.dw(z, gamma_);
    const Vec3 v = field_vector(z);
    const double sign = s == Sector::plus ? 1.0 : -1.0;
    return w * w + sign * dw + 0.25 * dot(v, v);
  }

  Vec3 magnetic_field(Sector s, double z) const {
    const double w = family_.w(z, gamma_);
    const Vec3 v = field_vector(z);
    const Vec3 dv = family_.dg(z, lambda_) * frame_.a;
    const double sign = s == Sector::plus ? 1.0 : -1.0;
    return (2.0 * w) * v + sign * dv;
  }

  Vec3 field_vector(double z) const { return family_.g(z, lambda_) * frame_.a + beta_ * frame_.b; }

  const FrameVectors& frame() const { return frame_; }

 private:
  SuperpotentialFamily family_;
  FrameVectors frame_;
  double gamma_;
  double beta_;
  double lambda_;
};

inline PartnerFields partner_fields(const ModelParams& p, const FrameVectors& frame = {},
                                    const SuperpotentialFamily& family = tanh_family()) {
  p.validate();
  return PartnerFields(p, Model{family, frame});
}

struct FlowStep {
  double gamma = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
};

// gamma_k, beta_k = gamma beta / gamma_k and the factorization energies
// epsilon_k for k = 0..n (epsilon_0 = 0).
inline std::vector<FlowStep> parameter_flow(const ModelParams& p, int n,
                                            const SuperpotentialFamily& family = tanh_family()) {
  p.validate();
  if (n < 0) throw DomainError("flow length must be nonnegative");
  const double invariant = p.gamma * p.beta;
  std::vector<FlowStep> flow;
  flow.reserve(static_cast<std::size_t>(n) + 1);
  flow.push_back({p.gamma, p.beta, 0.0});
  for (int k = 1; k <= n; ++k) {
    const FlowStep& prev = flow.back();
    const double gk = family.step(prev.gamma);
    if (!(gk > 0.0))
      throw InadmissibleError("parameter flow leaves gamma_k > 0 at k = " + std::to_string(k));
    const double bk = invariant / gk;
    const double eps = family.scalar_gap(prev.gamma, gk) + 0.25 * (prev.beta * prev.beta - bk * bk);
    flow.push_back({gk, bk, eps});
  }
  return flow;
}

inline ModelParams flowed(const ModelParams& p, const FlowStep& s, int level) {
  return ModelParams{s.gamma, s.beta, p.field_lambda, level};
}

struct ShapeInvarianceResiduals {
  double scalar = 0.0;
  double vector_a = 0.0;
  double vector_b = 0.0;
};

// Sup-norm over the grid nodes of the three shape-invariance conditions
//   W^2 + W' + beta^2/4 = W1^2 - W1' + beta1^2/4 + eps1
//   2 W g + g' = 2 W1 g - g'
//   W beta = W1 beta1
// for a caller-supplied next step (gamma1, beta1, eps1).
inline ShapeInvarianceResiduals shape_invariance_residuals(const ModelParams& p, const FlowStep& next,
                                                           const Grid& grid,
                                                           const SuperpotentialFamily& family = tanh_family()) {
  ShapeInvarianceResiduals r;
  for (int i = 0; i < grid.size(); ++i) {
    const double z = grid.node(i);
    const double w = family.w(z, p.gamma);
    const double dw = family.dw(z, p.gamma);
    const double w1 = family.w(z, next.gamma);
    const double dw1 = family.dw(z, next.gamma);
    const double g = family.g(z, p.field_lambda);
    const double dg = family.dg(z, p.field_lambda);
    const double lhs = w * w + dw + 0.25 * p.beta * p.beta;
    const double rhs = w1 * w1 - dw1 + 0.25 * next.beta * next.beta + next.epsilon;
    r.scalar = std::max(r.scalar, std::abs(lhs - rhs));
    r.vector_a = std::max(r.vector_a, std::abs((2.0 * w * g + dg) - (2.0 * w1 * g - dg)));
    r.vector_b = std::max(r.vector_b, std::abs(w * p.beta - w1 * next.beta));
  }
  return r;
}

// Residuals for the family's own flow step.
inline ShapeInvarianceResiduals shape_invariance_residuals(const ModelParams& p, const Grid& grid,
                                                           const SuperpotentialFamily& family = tanh_family()) {
  const auto flow = parameter_flow(p, 1, family);
  return shape_invariance_residuals(p, flow[1], grid, family);
}

}  // namespace spinshape
