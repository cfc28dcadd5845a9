#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spinshape/error.hpp"
#include "spinshape/fields.hpp"

namespace spinshape {

// Normalizability of the zero mode of H-(gamma_n, beta_n): gamma_n > |beta_n|/2
// (and gamma_n > 0, so that beta_n is defined).
inline bool level_admissible(double gamma, double beta, int n) {
  const double gn = gamma - n;
  if (!(gn > 0.0)) return false;
  const double bn = gamma * beta / gn;
  return gn > 0.5 * std::abs(bn);
}

// Decay rate gamma_n - |beta_n|/2 of the slowest channel of level n; positive
// iff the level is bound. Also the square root of the level's binding energy
// below the continuum threshold.
inline double level_decay_margin(double gamma, double beta, int n) {
  const double gn = gamma - n;
  if (!(gn > 0.0)) return -std::numeric_limits<double>::infinity();
  return gn - 0.5 * std::abs(gamma * beta / gn);
}

inline int bound_state_count(double gamma, double beta) {
  if (!(gamma > 0.0) || !std::isfinite(gamma) || !std::isfinite(beta))
    throw DomainError("bound_state_count needs finite gamma > 0");
  int n = 0;
  while (level_admissible(gamma, beta, n)) ++n;
  return n;
}

inline double energy_level(double gamma, double beta, int n) {
  if (n < 0 || !level_admissible(gamma, beta, n))
    throw InadmissibleError("level " + std::to_string(n) + " is not a bound state for gamma = " +
                            std::to_string(gamma) + ", beta = " + std::to_string(beta));
  const double gn = gamma - n;
  const double ratio = gamma / gn;
  return gamma * gamma - gn * gn + 0.25 * beta * beta * (1.0 - ratio * ratio);
}

// Lowest asymptotic channel energy: eigenvalues of M(+-inf)^2 are
// (gamma +- |beta|/2)^2.
inline double continuum_threshold(double gamma, double beta) {
  if (!(gamma > 0.0)) throw DomainError("continuum_threshold needs gamma > 0");
  const double d = gamma - 0.5 * std::abs(beta);
  return d * d;
}

struct Level {
  int n = 0;
  double energy = 0.0;
  int degeneracy = 2;
  double decay_margin = 0.0;
};

struct LevelTable {
  std::vector<Level> levels;
  double threshold = 0.0;

  bool broken_susy() const { return levels.empty(); }
};

inline LevelTable level_table(double gamma, double beta) {
  LevelTable t;
  t.threshold = continuum_threshold(gamma, beta);
  const int count = bound_state_count(gamma, beta);
  for (int n = 0; n < count; ++n)
    t.levels.push_back({n, energy_level(gamma, beta, n), 2, level_decay_margin(gamma, beta, n)});
  return t;
}

// Spectrum of H- for W = gamma z with constant field vector (g a + beta b):
// rotating the spin basis onto the field direction splits H- into two
// shifted oscillators with identical ladders 2 gamma k. Each level is
// doubly degenerate; the field strength only moves the oscillator centres.
inline double case1_spectrum(double gamma, double /*g*/, double /*beta*/, int k) {
  if (!(gamma > 0.0)) throw DomainError("case1_spectrum needs gamma > 0");
  if (k < 0) throw DomainError("oscillator index must be nonnegative");
  return 2.0 * gamma * k;
}

inline constexpr int case1_degeneracy() { return 2; }

}  // namespace spinshape
