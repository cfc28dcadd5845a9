#pragma once

#include <cmath>
#include <complex>

#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"

namespace spinshape {

namespace detail {
inline bool is_nonpositive_integer(std::complex<double> c) {
  if (c.imag() != 0.0) return false;
  const double r = c.real();
  return r <= 0.0 && r == std::floor(r);
}
}  // namespace detail

struct Hyp2f1Options {
  double rel_tol = 1e-14;
  double disc_margin = 1e-3;  // reject |xi| >= 1 - margin
  int max_terms = 100000;
};

// Gauss series sum_k (a)_k (b)_k / (c)_k xi^k / k!, restricted to the disc
// |xi| < 1 - margin. Terminates early when a or b is a nonpositive integer.
inline std::complex<double> hyp2f1(std::complex<double> a, std::complex<double> b, std::complex<double> c,
                                   std::complex<double> xi, const Hyp2f1Options& opt = {}) {
  if (detail::is_nonpositive_integer(c)) throw DomainError("hyp2f1: c is a nonpositive integer");
  if (!(std::abs(xi) < 1.0 - opt.disc_margin)) throw DomainError("hyp2f1: |xi| outside the series disc");

  std::complex<double> term = 1.0;
  std::complex<double> sum = 1.0;
  // Stop once two consecutive terms are below tolerance; a single small term
  // can be an accidental near-zero of the Pochhammer ratio.
  int quiet = 0;
  for (int k = 0; k < opt.max_terms; ++k) {
    const double kk = k;
    term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * xi;
    if (term == 0.0) return sum;
    sum += term;
    // Remaining tail is bounded by |term| |xi| / (1 - |xi|) once the ratio
    // settles near |xi|.
    const double tail = std::abs(term) * std::abs(xi) / (1.0 - std::abs(xi));
    if (tail <= opt.rel_tol * std::abs(sum)) {
      if (++quiet >= 2) return sum;
    } else {
      quiet = 0;
    }
  }
  throw SolverError("hyp2f1: series did not converge");
}

// d/dxi F(a,b;c;xi) = (ab/c) F(a+1,b+1;c+1;xi)
inline std::complex<double> hyp2f1_derivative(std::complex<double> a, std::complex<double> b,
                                              std::complex<double> c, std::complex<double> xi,
                                              const Hyp2f1Options& opt = {}) {
  return a * b / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, xi, opt);
}

enum class HypergeometricBranch { first = 1, second = 2 };

// First component phi_1(z) of the reduced two-component problem, whose second
// order form is
//   (-d/dz + g/2)(d/dz + g/2) phi_1 = -beta_n^2/4 phi_1,  g = lambda / cosh z,
// written as f(xi) exp(-(lambda/2) arctan(sinh z)) with xi = (1 - i sinh z)/2.
// Branch 1: f = F(a,b;c;xi); branch 2: f = xi^{1-c} (1-xi)^{c-a-b}
// F(1-a,1-b;2-c;xi), with a = beta_n/2, b = -beta_n/2, c = 1/2 - i lambda/2.
class ReducedClosedForm {
 public:
  ReducedClosedForm(double beta_n, double lambda, HypergeometricBranch branch)
      : a_(0.5 * beta_n), b_(-0.5 * beta_n), c_(0.5, -0.5 * lambda), lambda_(lambda), branch_(branch) {}

  std::complex<double> xi(double z) const { return {0.5, -0.5 * std::sinh(z)}; }

  std::complex<double> operator()(double z) const {
    const double x = std::sinh(z);
    if (!(x * x < 3.0)) throw DomainError("closed form needs |sinh z| < sqrt(3) to stay in the series disc");
    return f(xi(z)) * std::exp(-0.5 * lambda_ * std::atan(x));
  }

  // d phi_1 / dz from the series derivative.
  std::complex<double> derivative(double z) const {
    const double x = std::sinh(z);
    if (!(x * x < 3.0)) throw DomainError("closed form needs |sinh z| < sqrt(3) to stay in the series disc");
    const std::complex<double> s = xi(z);
    const std::complex<double> dxi_dz(0.0, -0.5 * std::cosh(z));
    const double darg_dz = -0.5 * lambda_ / std::cosh(z);  // d/dz of -(lambda/2) arctan(sinh z)
    const std::complex<double> pref = std::exp(-0.5 * lambda_ * std::atan(x));
    return pref * (df(s) * dxi_dz + f(s) * darg_dz);
  }

 private:
  std::complex<double> f(std::complex<double> s) const {
    if (branch_ == HypergeometricBranch::first) return hyp2f1(a_, b_, c_, s);
    const std::complex<double> one(1.0, 0.0);
    return std::pow(s, one - c_) * std::pow(one - s, c_ - a_ - b_) * hyp2f1(one - a_, one - b_, 2.0 - c_, s);
  }

  std::complex<double> df(std::complex<double> s) const {
    if (branch_ == HypergeometricBranch::first) return hyp2f1_derivative(a_, b_, c_, s);
    const std::complex<double> one(1.0, 0.0);
    const std::complex<double> p = one - c_;
    const std::complex<double> q = c_ - a_ - b_;
    const std::complex<double> F = hyp2f1(one - a_, one - b_, 2.0 - c_, s);
    const std::complex<double> dF = hyp2f1_derivative(one - a_, one - b_, 2.0 - c_, s);
    const std::complex<double> sp = std::pow(s, p);
    const std::complex<double> sq = std::pow(one - s, q);
    return sp * sq * (p / s * F - q / (one - s) * F + dF);
  }

  std::complex<double> a_, b_, c_;
  double lambda_;
  HypergeometricBranch branch_;
};

inline std::complex<double> phi1_closed_form(double z, const ModelParams& params_n, HypergeometricBranch branch) {
  return ReducedClosedForm(params_n.beta, params_n.field_lambda, branch)(z);
}

}  // namespace spinshape
