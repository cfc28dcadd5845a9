#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "spinshape/analytic.hpp"
#include "spinshape/banded.hpp"
#include "spinshape/discretize.hpp"

using namespace spinshape;

namespace {

Eigen::MatrixXd dense(const BandedSymmetricOperator& h) {
  const int n = h.dimension();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - h.half_bandwidth()); j <= std::min(n - 1, i + h.half_bandwidth()); ++j)
      m(i, j) = h(i, j);
  return m;
}

BandedSymmetricOperator random_band(int n, int b, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  BandedSymmetricOperator h(n, b);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d <= std::min(b, i); ++d) h.lower(i, d) = nd(rng);
  return h;
}

SuperpotentialFamily zero_family() {
  SuperpotentialFamily f = linear_family();
  f.name = "zero";
  f.w = [](double, double) { return 0.0; };
  f.dw = [](double, double) { return 0.0; };
  f.g = [](double, double) { return 0.0; };
  return f;
}

double residual(const BandedSymmetricOperator& h, const Eigenpair& p) {
  auto hv = h.multiply(p.vector);
  double r = 0.0;
  for (std::size_t i = 0; i < hv.size(); ++i) r = std::max(r, std::abs(hv[i] - p.value * p.vector[i]));
  return r;
}

}  // namespace

TEST(Grid, MirrorSymmetricBitExact) {
  for (int n : {16, 17, 2000, 2001}) {
    const Grid g = Grid::from_half_width(20.0, n);
    for (int i = 0; i < n; ++i) EXPECT_EQ(g.node(i), -g.node(g.mirror(i)));
    const Grid l = g.links();
    for (int j = 0; j < l.size(); ++j) EXPECT_EQ(l.node(j), g.link(j));
    EXPECT_EQ(l.widened(), g);
  }
  const Grid odd = Grid::from_half_width(20.0, 2001);
  EXPECT_EQ(odd.node(1000), 0.0);
  EXPECT_DOUBLE_EQ(odd.spacing(), 40.0 / 2002.0);
  EXPECT_THROW(Grid::from_half_width(20.0, 15), ConfigError);
  EXPECT_THROW(Grid::from_half_width(0.0, 100), ConfigError);
}

TEST(InnerProduct, BasicProperties) {
  const Grid g = Grid::from_half_width(5.0, 64);
  SpinorField a(g), b(g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < g.size(); ++i) {
    a.set(i, {cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
    b.set(i, {cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
  }
  const cplx aa = inner_product(a, a);
  EXPECT_EQ(aa.imag(), 0.0);
  EXPECT_GT(aa.real(), 0.0);
  EXPECT_LT(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))), 1e-13);
  EXPECT_NEAR(norm(normalized(a)), 1.0, 1e-14);
  EXPECT_THROW(inner_product(a, SpinorField(g.links())), GridMismatch);
}

TEST(Eigen, TwoByTwo) {
  BandedSymmetricOperator h(2, 1);
  h.add(0, 0, 2.0);
  h.add(1, 1, 2.0);
  h.add(1, 0, 1.0);
  const auto r = eigen_lowest(h, 2);
  EXPECT_NEAR(r.pairs[0].value, 1.0, 1e-13);
  EXPECT_NEAR(r.pairs[1].value, 3.0, 1e-13);
  EXPECT_TRUE(r.all_converged());
}

TEST(Eigen, MatchesDenseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 40 + 23 * trial;
    const int b = 1 + trial % 4;
    const auto h = random_band(n, b, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h));
    const auto r = eigen_lowest(h, 8);
    for (int k = 0; k < 8; ++k) {
      EXPECT_NEAR(r.pairs[k].value, es.eigenvalues()(k), 1e-11 * r.scale);
      EXPECT_LT(residual(h, r.pairs[k]), 1e-9 * r.scale);
    }
  }
}

TEST(Eigen, DegenerateClusterOrthonormal) {
  // two identical uncoupled blocks: every eigenvalue exactly doubled
  std::mt19937_64 rng(5);
  const auto blk = random_band(60, 2, rng);
  BandedSymmetricOperator h(120, 2);
  for (int i = 0; i < 60; ++i)
    for (int d = 0; d <= std::min(2, i); ++d) h.lower(i, d) = h.lower(60 + i, d) = blk.lower(i, d);
  const auto r = eigen_lowest(h, 6);
  for (int k = 0; k < 6; k += 2) EXPECT_NEAR(r.pairs[k].value, r.pairs[k + 1].value, 1e-12 * r.scale);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      double d = 0.0;
      for (int i = 0; i < 120; ++i) d += r.pairs[a].vector[i] * r.pairs[b].vector[i];
      EXPECT_NEAR(d, a == b ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Eigen, InertiaMatchesOracle) {
  std::mt19937_64 rng(17);
  const auto h = random_band(80, 3, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h));
  for (double shift : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
    int expect = 0;
    for (int i = 0; i < 80; ++i) expect += es.eigenvalues()(i) < shift;
    EXPECT_EQ(count_eigenvalues_below(h, shift), expect);
  }
}

TEST(Eigen, ThreadedRunIsBitIdentical) {
  const ModelParams p;
  const auto h = discretize_factorized(p, Grid::from_half_width(20.0, 800), Sector::minus);
  EigenOptions one, four;
  four.threads = 4;
  const auto a = eigen_lowest(h, 6, one);
  const auto b = eigen_lowest(h, 6, four);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(a.pairs[k].value, b.pairs[k].value);
    EXPECT_EQ(a.pairs[k].vector, b.pairs[k].vector);
  }
}

TEST(Eigen, RejectsBadArguments) {
  BandedSymmetricOperator h(4, 1);
  EXPECT_THROW(eigen_lowest(h, 5), DomainError);
  EigenOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(eigen_lowest(h, 1, bad), DomainError);
}

TEST(Discretize, FreeLaplacianExactDiscreteSpectrum) {
  Model m;
  m.family = zero_family();
  const ModelParams p{1.0, 0.0, 0.0, 0};
  const double L = 10.0;
  const int n = 999;
  const Grid g = Grid::from_half_width(L, n);
  const double h = g.spacing();
  // direct: Dirichlet on N nodes, 2/h^2 (1 - cos(m pi h / 2L)), each twice (spin)
  const auto ed = eigen_lowest(discretize_direct(p, g, Sector::minus, m), 6);
  // factorized H+: Dirichlet on N-1 links; H-: free ends, with a zero mode
  const auto ep = eigen_lowest(discretize_factorized(p, g, Sector::plus, m), 6);
  const auto em = eigen_lowest(discretize_factorized(p, g, Sector::minus, m), 8);
  for (int k = 1; k <= 3; ++k) {
    const double direct = 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi / (n + 1)));
    const double fact = 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi / n));
    EXPECT_NEAR(ed.pairs[2 * k - 2].value, direct, 1e-12 * ed.scale);
    EXPECT_NEAR(ed.pairs[2 * k - 1].value, direct, 1e-12 * ed.scale);
    EXPECT_NEAR(ep.pairs[2 * k - 2].value, fact, 1e-12 * ep.scale);
    EXPECT_NEAR(em.pairs[2 * k].value, fact, 1e-12 * em.scale);
  }
  EXPECT_LT(std::abs(em.pairs[0].value), 1e-10 * em.scale);
}

TEST(Discretize, FreeLaplacianExtrapolatesToContinuum) {
  Model m;
  m.family = zero_family();
  const ModelParams p{1.0, 0.0, 0.0, 0};
  const double L = 10.0;
  const auto e1 = eigen_lowest(discretize_direct(p, Grid::from_half_width(L, 999), Sector::minus, m), 6);
  const auto e2 = eigen_lowest(discretize_direct(p, Grid::from_half_width(L, 1999), Sector::minus, m), 6);
  for (int k = 1; k <= 3; ++k) {
    const double exact = std::pow(k * std::numbers::pi / (2.0 * L), 2);
    const double rich = (4.0 * e2.pairs[2 * k - 2].value - e1.pairs[2 * k - 2].value) / 3.0;
    EXPECT_LT(std::abs(rich / exact - 1.0), 1e-6);
  }
}

TEST(Discretize, FactorizedIsSymmetricPsdAndBanded) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 400);
  for (Sector s : {Sector::minus, Sector::plus}) {
    const auto h = discretize_factorized(p, g, s);
    EXPECT_EQ(h.half_bandwidth(), 3);
    EXPECT_EQ(h.dimension(), s == Sector::minus ? 800 : 798);
    const auto d = dense(h);
    EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    EXPECT_GE(es.eigenvalues()(0), -1e-12 * h.norm_inf());
  }
  EXPECT_EQ(discretize_direct(p, g, Sector::minus).half_bandwidth(), 3);
}

TEST(Discretize, BandMatchesOperatorApplication) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 300);
  const FirstOrderOperator a(g, p);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  std::vector<double> x(2 * g.size()), y(2 * (g.size() - 1));
  for (auto& v : x) v = nd(rng);
  for (auto& v : y) v = nd(rng);
  const auto hx = discretize_factorized(a, Sector::minus).multiply(x);
  const auto hy = discretize_factorized(a, Sector::plus).multiply(y);
  const auto ox = a.apply_h_minus(SpinorField::from_real(g, x));
  const auto oy = a.apply_h_plus(SpinorField::from_real(g.links(), y));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(hx[i], ox.values()[i].real(), 1e-9);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(hy[i], oy.values()[i].real(), 1e-9);
}

TEST(Discretize, AdjointnessToRoundoff) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 500);
  const FirstOrderOperator a(g, p);
  std::mt19937_64 rng(29);
  std::normal_distribution<double> nd;
  SpinorField psi(g), phi(g.links());
  for (int i = 0; i < psi.size(); ++i) psi.set(i, {cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
  for (int i = 0; i < phi.size(); ++i) phi.set(i, {cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
  const cplx lhs = inner_product(phi, a.lower(psi));
  const cplx rhs = inner_product(a.raise(phi), psi);
  EXPECT_LT(std::abs(lhs - rhs), 1e-12 * norm(phi) * norm(a.lower(psi)));
  EXPECT_THROW(a.lower(phi), GridMismatch);
  EXPECT_THROW(a.raise(psi), GridMismatch);
}

TEST(Discretize, ComplexFrameIsRejectedByBandAssembly) {
  Model m;
  m.frame.b = {0.0, 1.0, 0.0};
  EXPECT_THROW(discretize_factorized(ModelParams{}, Grid::from_half_width(10.0, 100), Sector::minus, m), DomainError);
}

TEST(Discretize, ScalarLimitWell) {
  const ModelParams p{2.0, 0.0, 0.0, 0};
  const auto e = eigen_lowest(discretize_direct(p, Grid::from_half_width(20.0, 3999), Sector::minus), 4);
  EXPECT_NEAR(e.pairs[0].value, 0.0, 1e-3);
  EXPECT_NEAR(e.pairs[1].value, 0.0, 1e-3);
  EXPECT_NEAR(e.pairs[2].value, 3.0, 1e-3);
  EXPECT_NEAR(e.pairs[3].value, 3.0, 1e-3);
}

TEST(Discretize, SchemesAgreeToSecondOrder) {
  const ModelParams p;
  std::vector<double> diff;
  for (int n : {999, 1999, 3999}) {
    const Grid g = Grid::from_half_width(20.0, n);
    const auto f = eigen_lowest(discretize_factorized(p, g, Sector::minus), 3);
    const auto d = eigen_lowest(discretize_direct(p, g, Sector::minus), 3);
    diff.push_back(std::abs(f.pairs[2].value - d.pairs[2].value));
  }
  EXPECT_NEAR(diff[0] / diff[1], 4.0, 0.4);
  EXPECT_NEAR(diff[1] / diff[2], 4.0, 0.4);
}

TEST(Discretize, IsospectralAndKernel) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 2000);
  const auto hm = discretize_factorized(p, g, Sector::minus);
  const auto hp = discretize_factorized(p, g, Sector::plus);
  const auto em = eigen_lowest(hm, 6);
  const auto ep = eigen_lowest(hp, 4);
  EXPECT_EQ(normalizable_kernel_dimension(em, g, kernel_cutoff(hm)), 2);
  EXPECT_EQ(normalizable_kernel_dimension(ep, g.links(), kernel_cutoff(hp)), 0);
  for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(em.pairs[k + 2].value / ep.pairs[k].value - 1.0), 1e-10);
}

TEST(Discretize, BrokenCaseHasNoNormalizableKernel) {
  const ModelParams p{0.5, 2.0, 1.0, 0};
  const Grid g = Grid::from_half_width(20.0, 2000);
  const auto hm = discretize_factorized(p, g, Sector::minus);
  const auto em = eigen_lowest(hm, 4);
  // the exact discrete kernel exists but is pinned to the walls
  EXPECT_LT(em.pairs[1].value, kernel_cutoff(hm));
  EXPECT_EQ(normalizable_kernel_dimension(em, g, kernel_cutoff(hm)), 0);
  const auto c = numeric_level_count(p, g, continuum_threshold(0.5, 2.0));
  EXPECT_EQ(c.clusters(), 0);
}

TEST(Discretize, ConvergenceOrderTwo) {
  const ModelParams p;
  std::vector<double> err;
  for (double h : {0.04, 0.02, 0.01}) {
    const Grid g = Grid::from_half_width(20.0, static_cast<int>(std::lround(40.0 / h)) - 1);
    err.push_back(std::abs(eigen_lowest(discretize_factorized(p, g, Sector::minus), 3).pairs[2].value - 32.0 / 9.0));
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2);
  EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.2);
}

TEST(Discretize, LinearSuperpotentialOperator) {
  Model m;
  m.family = linear_family();
  const ModelParams p{1.0, 1.0, 1.0, 0};
  const auto e = eigen_lowest(discretize_factorized(p, Grid::from_half_width(12.0, 1200), Sector::minus, m), 6);
  const double expect[6] = {0, 0, 2, 2, 4, 4};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(e.pairs[k].value, expect[k], 1e-3 * std::max(1.0, expect[k]));
}
