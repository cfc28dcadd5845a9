#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "spinshape/error.hpp"

namespace spinshape {

// Real symmetric band matrix. Only the lower bands are stored:
// lower(i, d) == H(i, i - d) for 0 <= d <= half_bandwidth, so the stored
// matrix is symmetric bit-for-bit by construction.
class BandedSymmetricOperator {
 public:
  BandedSymmetricOperator(int dimension, int half_bandwidth)
      : n_(dimension), b_(half_bandwidth), band_(static_cast<std::size_t>(dimension) * (half_bandwidth + 1), 0.0) {
    if (dimension < 1 || half_bandwidth < 0) throw DomainError("band matrix needs dimension >= 1, bandwidth >= 0");
  }

  int dimension() const { return n_; }
  int half_bandwidth() const { return b_; }

  double& lower(int i, int d) { return band_[index(i, d)]; }
  double lower(int i, int d) const { return band_[index(i, d)]; }

  double operator()(int i, int j) const {
    if (i < j) std::swap(i, j);
    const int d = i - j;
    return d > b_ ? 0.0 : band_[index(i, d)];
  }

  // Adds v to H(i, j) (and implicitly H(j, i)); requires |i - j| <= bandwidth.
  void add(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    if (i - j > b_) throw DomainError("entry outside the stored band");
    band_[index(i, i - j)] += v;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i) y[i] = 0.0;
    for (int i = 0; i < n_; ++i) {
      y[i] += lower(i, 0) * x[i];
      for (int d = 1; d <= b_ && d <= i; ++d) {
        const double v = lower(i, d);
        y[i] += v * x[i - d];
        y[i - d] += v * x[i];
      }
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
  }

  // Gershgorin interval containing the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < n_; ++i) {
      double r = 0.0;
      for (int j = std::max(0, i - b_); j <= std::min(n_ - 1, i + b_); ++j)
        if (j != i) r += std::abs((*this)(i, j));
      lo = std::min(lo, lower(i, 0) - r);
      hi = std::max(hi, lower(i, 0) + r);
    }
    return {lo, hi};
  }

  // Max absolute row sum; bounds the spectral radius.
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) {
      double r = 0.0;
      for (int j = std::max(0, i - b_); j <= std::min(n_ - 1, i + b_); ++j) r += std::abs((*this)(i, j));
      m = std::max(m, r);
    }
    return m;
  }

 private:
  std::size_t index(int i, int d) const { return static_cast<std::size_t>(d) * n_ + i; }

  int n_;
  int b_;
  std::vector<double> band_;
};

// Number of eigenvalues strictly below `shift`, from the signs of the pivots
// of an unpivoted LDL^T factorization of H - shift I (Sylvester inertia).
// Returns nullopt when a pivot falls below `pivmin` in magnitude or the
// factorization stops being finite.
inline std::optional<int> inertia_below(const BandedSymmetricOperator& h, double shift, double pivmin) {
  const int n = h.dimension();
  const int b = h.half_bandwidth();
  // l[i*b + (k - (i - b))] = L(i, k) for k in [i-b, i-1]
  std::vector<double> l(static_cast<std::size_t>(n) * std::max(b, 1), 0.0);
  std::vector<double> d(n, 0.0);
  auto L = [&](int i, int k) -> double& { return l[static_cast<std::size_t>(i) * b + (k - (i - b))]; };
  int negatives = 0;
  for (int i = 0; i < n; ++i) {
    const int first = std::max(0, i - b);
    for (int k = first; k < i; ++k) {
      double s = h(i, k);
      for (int m = std::max(first, k - b); m < k; ++m) s -= L(i, m) * d[m] * L(k, m);
      L(i, k) = s / d[k];
    }
    double di = h.lower(i, 0) - shift;
    for (int m = first; m < i; ++m) di -= L(i, m) * L(i, m) * d[m];
    if (!std::isfinite(di) || std::abs(di) < pivmin) return std::nullopt;
    d[i] = di;
    if (di < 0.0) ++negatives;
  }
  return negatives;
}

struct EigenOptions {
  double tol = 1e-14;  // absolute accuracy tol * spectral scale
  int threads = 1;
  bool vectors = true;
  int max_shift_retries = 8;
  int max_inverse_iterations = 8;
};

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
  bool converged = true;
  double residual = 0.0;
};

struct EigenResult {
  std::vector<Eigenpair> pairs;
  double scale = 0.0;  // spectral scale used for tolerances (max |Gershgorin bound|)

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(pairs.size());
    for (const auto& p : pairs) v.push_back(p.value);
    return v;
  }
  bool all_converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const Eigenpair& p) { return p.converged; });
  }
};

namespace detail {

// Inertia count with bounded shift perturbation on breakdown. After the
// retries are exhausted the shift is accepted with tiny pivots clamped.
inline int robust_count(const BandedSymmetricOperator& h, double shift, double scale, const EigenOptions& opt) {
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, scale) * 1e3;
  double s = shift;
  for (int attempt = 0; attempt <= opt.max_shift_retries; ++attempt) {
    if (auto c = inertia_below(h, s, pivmin)) return *c;
    const double step = opt.tol * scale * (attempt + 1);
    s = shift + ((attempt % 2 == 0) ? step : -step);
  }
  throw SolverError("inertia count broke down at every perturbed shift near " + std::to_string(shift));
}

// Band LU with partial pivoting, LAPACK gbtrf layout: A(i, j) lives at
// ab[(kl + ku + i - j) + j * ldab], ldab = 2 kl + ku + 1.
class BandLU {
 public:
  BandLU(const BandedSymmetricOperator& h, double shift, double tiny)
      : n_(h.dimension()), kl_(h.half_bandwidth()), ku_(h.half_bandwidth()), ldab_(2 * kl_ + ku_ + 1),
        ab_(static_cast<std::size_t>(ldab_) * n_, 0.0), ipiv_(n_) {
    for (int j = 0; j < n_; ++j)
      for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i)
        at(i, j) = h(i, j) - (i == j ? shift : 0.0);
    for (int j = 0; j < n_; ++j) {
      const int last = std::min(n_ - 1, j + kl_);
      int p = j;
      for (int i = j + 1; i <= last; ++i)
        if (std::abs(at(i, j)) > std::abs(at(p, j))) p = i;
      ipiv_[j] = p;
      const int cmax = std::min(n_ - 1, j + kl_ + ku_);
      if (p != j)
        for (int c = j; c <= cmax; ++c) std::swap(at(j, c), at(p, c));
      if (std::abs(at(j, j)) < tiny) at(j, j) = at(j, j) < 0.0 ? -tiny : tiny;
      const double piv = at(j, j);
      for (int i = j + 1; i <= last; ++i) {
        const double m = at(i, j) / piv;
        at(i, j) = m;
        if (m == 0.0) continue;
        for (int c = j + 1; c <= cmax; ++c) at(i, c) -= m * at(j, c);
      }
    }
  }

  void solve(std::span<double> x) const {
    for (int j = 0; j < n_; ++j) {
      if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
      const int last = std::min(n_ - 1, j + kl_);
      for (int i = j + 1; i <= last; ++i) x[i] -= at(i, j) * x[j];
    }
    for (int j = n_ - 1; j >= 0; --j) {
      double s = x[j];
      const int cmax = std::min(n_ - 1, j + kl_ + ku_);
      for (int c = j + 1; c <= cmax; ++c) s -= at(j, c) * x[c];
      x[j] = s / at(j, j);
    }
  }

 private:
  double& at(int i, int j) { return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_]; }
  double at(int i, int j) const {
    return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_];
  }

  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool normalize(std::span<double> v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  for (auto& x : v) x /= n;
  return true;
}

// Modified Gram-Schmidt of v against `basis` (twice, for stability).
inline void orthogonalize(std::span<double> v, const std::vector<const std::vector<double>*>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto* q : basis) {
      const double c = dot(*q, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * (*q)[i];
    }
}

}  // namespace detail

// Bisection on the inertia count for the j-th smallest eigenvalue (0-based).
inline double bisect_eigenvalue(const BandedSymmetricOperator& h, int j, double lo, double hi, double scale,
                                const EigenOptions& opt = {}) {
  const double width_tol = opt.tol * scale;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= width_tol || mid <= lo || mid >= hi) break;
    if (detail::robust_count(h, mid, scale, opt) > j)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Number of eigenvalues strictly below `shift`.
inline int count_eigenvalues_below(const BandedSymmetricOperator& h, double shift, const EigenOptions& opt = {}) {
  const auto [glo, ghi] = h.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), 1e-300});
  return detail::robust_count(h, shift, scale, opt);
}

// k smallest eigenvalues by Sturm bisection; eigenvectors (optional) by
// inverse iteration with the band LU of H - lambda I. Eigenvalues closer than
// 10 tol scale form a cluster whose vectors are iterated and orthonormalized
// together.
inline EigenResult eigen_lowest(const BandedSymmetricOperator& h, int k, const EigenOptions& opt = {}) {
  const int n = h.dimension();
  if (k < 0 || k > n) throw DomainError("eigen_lowest: k must lie in [0, dimension]");
  if (!(opt.tol > 0.0)) throw DomainError("eigen_lowest: tol must be positive");
  auto [glo, ghi] = h.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), 1e-300});
  glo -= opt.tol * scale;
  ghi += opt.tol * scale;

  EigenResult result;
  result.scale = scale;
  result.pairs.resize(k);

  // Each index is bisected independently, so the values do not depend on
  // how the indices are distributed over workers.
  const int workers = std::clamp(opt.threads, 1, std::max(1, k));
  auto run = [&](int first) {
    for (int j = first; j < k; j += workers) result.pairs[j].value = bisect_eigenvalue(h, j, glo, ghi, scale, opt);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  // Bisection of separate indices can leave round-off inversions inside a
  // cluster; restore order.
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
  if (!opt.vectors || k == 0) return result;

  const double cluster_gap = 10.0 * opt.tol * scale;
  const double tiny = std::numeric_limits<double>::epsilon() * scale;
  const double conv_tol = 1e-10 * scale;
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  std::vector<const std::vector<double>*> done;
  int start = 0;
  while (start < k) {
    int end = start + 1;
    while (end < k && result.pairs[end].value - result.pairs[end - 1].value <= cluster_gap) ++end;
    const int m = end - start;
    double shift = 0.0;
    for (int j = start; j < end; ++j) shift += result.pairs[j].value;
    shift /= m;
    const detail::BandLU lu(h, shift, tiny);

    std::vector<std::vector<double>> block(m, std::vector<double>(n));
    for (auto& v : block)
      for (auto& x : v) x = uni(rng);

    std::vector<double> res(m, std::numeric_limits<double>::infinity());
    std::vector<double> hv(n);
    for (int it = 0; it < opt.max_inverse_iterations; ++it) {
      for (int c = 0; c < m; ++c) {
        lu.solve(block[c]);
        std::vector<const std::vector<double>*> basis = done;
        for (int p = 0; p < c; ++p) basis.push_back(&block[p]);
        detail::orthogonalize(block[c], basis);
        if (!detail::normalize(block[c])) {
          for (auto& x : block[c]) x = uni(rng);
          detail::orthogonalize(block[c], basis);
          detail::normalize(block[c]);
        }
      }
      double worst = 0.0;
      for (int c = 0; c < m; ++c) {
        h.multiply(block[c], hv);
        const double lam = result.pairs[start + c].value;
        double r = 0.0;
        for (int i = 0; i < n; ++i) r += (hv[i] - lam * block[c][i]) * (hv[i] - lam * block[c][i]);
        res[c] = std::sqrt(r);
        worst = std::max(worst, res[c]);
      }
      if (it >= 1 && worst <= conv_tol) break;
    }
    for (int c = 0; c < m; ++c) {
      auto& p = result.pairs[start + c];
      p.vector = std::move(block[c]);
      p.residual = res[c];
      p.converged = res[c] <= conv_tol;
    }
    for (int c = 0; c < m; ++c) done.push_back(&result.pairs[start + c].vector);
    start = end;
  }
  return result;
}

// Eigenvalues of a small dense symmetric matrix (row-major, m x m) by cyclic
// Jacobi rotations; ascending.
inline std::vector<double> small_symmetric_eigenvalues(std::vector<double> a, int m) {
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * m + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-300) break;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = 0.5 * (A(q, q) - A(p, p)) / A(p, q);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < m; ++r) {
          const double arp = A(r, p), arq = A(r, q);
          A(r, p) = c * arp - s * arq;
          A(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < m; ++r) {
          const double apr = A(p, r), aqr = A(q, r);
          A(p, r) = c * apr - s * aqr;
          A(q, r) = s * apr + c * aqr;
        }
      }
  }
  std::vector<double> ev(m);
  for (int i = 0; i < m; ++i) ev[i] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace spinshape
