#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spinshape/analytic.hpp"
#include "spinshape/symmetry.hpp"
#include "spinshape/zeromode.hpp"

using namespace spinshape;

namespace {

SpinorField random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpinorField f(g);
  for (int i = 0; i < g.size(); ++i) f.set(i, {cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
  return f;
}

double max_diff(const SpinorField& a, const SpinorField& b) {
  SpinorField d = a;
  d.axpy(-1.0, b);
  return d.max_abs();
}

std::vector<double> combined_spectrum(const ModelParams& p, const Grid& g, int k) {
  std::vector<double> out;
  for (Sector s : {Sector::minus, Sector::plus})
    for (double e : eigen_lowest(discretize_factorized(p, g, s), k).values()) out.push_back(e);
  return out;
}

}  // namespace

TEST(OperatorT, Involution) {
  const Grid g = Grid::from_half_width(8.0, 301);
  const SpinorField psi = random_field(g, 1);
  EXPECT_EQ(max_diff(apply_T(apply_T(psi)), psi), 0.0);
  // (psi +- T psi)/2 are eigenvectors with eigenvalue +-1
  SpinorField even = psi, odd = psi;
  even.axpy(1.0, apply_T(psi));
  odd.axpy(-1.0, apply_T(psi));
  EXPECT_EQ(max_diff(apply_T(even), even), 0.0);
  SpinorField neg = odd;
  neg.axpy(-2.0, odd);
  EXPECT_EQ(max_diff(apply_T(odd), neg), 0.0);
}

TEST(OperatorT, GaussianExample) {
  const Grid g = Grid::from_half_width(6.0, 200);
  SpinorField psi(g);
  for (int i = 0; i < g.size(); ++i) psi.set(i, {std::exp(-g.node(i) * g.node(i)), 0.0});
  const SpinorField t = apply_T(psi);
  for (int i = 0; i < g.size(); ++i) {
    EXPECT_EQ(t(i, 0), cplx(0.0));
    EXPECT_EQ(t(i, 1), cplx(0.0, std::exp(-g.node(i) * g.node(i))));
  }
}

TEST(OperatorR, AntilinearInvolution) {
  const Grid g = Grid::from_half_width(8.0, 100);
  const SpinorField psi = random_field(g, 2);
  EXPECT_EQ(max_diff(apply_R(apply_R(psi)), psi), 0.0);
  SpinorField ipsi = psi;
  for (auto& v : ipsi.values()) v *= cplx(0.0, 1.0);
  SpinorField expect = apply_R(psi);
  for (auto& v : expect.values()) v *= cplx(0.0, -1.0);
  EXPECT_EQ(max_diff(apply_R(ipsi), expect), 0.0);
}

TEST(OperatorR, AnticommutesWithT) {
  const Grid g = Grid::from_half_width(8.0, 101);
  const SpinorField psi = random_field(g, 3);
  SpinorField s = apply_R(apply_T(psi));
  s.axpy(1.0, apply_T(apply_R(psi)));
  EXPECT_EQ(s.max_abs(), 0.0);
}

TEST(Algebra, TanhResidualsVanish) {
  const auto r = algebra_check({2.5, 1.0, 1.0, 0}, Grid::from_half_width(20.0, 2000));
  EXPECT_GT(r.scale, 1.0);
  EXPECT_LT(r.max_residual(), 1e-12 * r.scale);
  EXPECT_TRUE(r.passed());
}

TEST(Algebra, OddGridAlsoPasses) {
  const auto r = algebra_check({3.3, -0.4, 0.7, 0}, Grid::from_half_width(15.0, 1501));
  EXPECT_TRUE(r.passed());
}

TEST(Algebra, ShiftedSuperpotentialBreaksT) {
  Model m;
  m.family = shifted_tanh_family(0.3);
  const auto r = algebra_check({2.5, 1.0, 1.0, 0}, Grid::from_half_width(20.0, 2000), m);
  EXPECT_GT(r.anticommutator_TA, 1e-2 * r.scale);
  EXPECT_GT(r.commutator_TH, 1e-2 * r.scale);
  EXPECT_LT(r.commutator_RA, 1e-12 * r.scale);
  EXPECT_LT(r.supercharge_anticommutator, 1e-12 * r.scale);
  EXPECT_LT(r.supercharge_square, 1e-12 * r.scale);
  EXPECT_LT(r.supercharge_commutator, 1e-12 * r.scale);
  EXPECT_FALSE(r.passed());
}

TEST(Algebra, RotatedFrameBreaksR) {
  Model m;
  m.frame.b = {0.0, 1.0, 0.0};
  const auto r = algebra_check({2.5, 1.0, 1.0, 0}, Grid::from_half_width(20.0, 2000), m);
  EXPECT_GT(r.commutator_RA, 1e-2 * r.scale);
  EXPECT_LT(r.supercharge_anticommutator, 1e-12 * r.scale);
  EXPECT_FALSE(r.passed());
}

TEST(Algebra, KernelIsConjugationInvariant) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 2000);
  const auto zm = zero_mode_pair(g, p);
  for (const auto* psi : {&zm.psi_1, &zm.psi_2})
    EXPECT_NEAR(discrete_annihilation_residual(apply_R(*psi), p), discrete_annihilation_residual(*psi, p), 1e-15);
}

TEST(Degeneracy, ReportExamples) {
  const auto c = degeneracy_report({0.0, 1e-13, 3.55555, 3.55556, 3.5555601, 5.0}, 4.0, 1e-5);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].multiplicity, 2);
  EXPECT_EQ(c[1].multiplicity, 3);
  EXPECT_NEAR(c[1].spread, 1.01e-5, 1e-10);
  EXPECT_TRUE(degeneracy_report({}, 1.0, 1e-6).empty());
}

TEST(Degeneracy, HMinusPairsAndCombinedQuartets) {
  const ModelParams p;
  const Grid g = Grid::from_half_width(20.0, 2000);
  const double threshold = continuum_threshold(p.gamma, p.beta);
  const auto minus = eigen_lowest(discretize_factorized(p, g, Sector::minus), 6).values();
  const auto cm = degeneracy_report(minus, threshold, 1e-9);
  ASSERT_EQ(cm.size(), 2u);
  EXPECT_EQ(cm[0].multiplicity, 2);
  EXPECT_EQ(cm[1].multiplicity, 2);
  EXPECT_NEAR(cm[0].value, 0.0, 1e-9);
  EXPECT_NEAR(cm[1].value, 3.5556, 1e-3);

  const auto cc = degeneracy_report(combined_spectrum(p, g, 6), threshold, 1e-9);
  ASSERT_EQ(cc.size(), 2u);
  EXPECT_EQ(cc[0].multiplicity, 2);
  EXPECT_EQ(cc[1].multiplicity, 4);
}

TEST(Degeneracy, FullHamiltonianMatchesConcatenation) {
  const ModelParams p;
  const FirstOrderOperator a(Grid::from_half_width(12.0, 240), p);
  const auto full = eigen_lowest(full_hamiltonian(a), 6).values();
  auto cat = combined_spectrum(p, a.node_grid(), 6);
  std::sort(cat.begin(), cat.end());
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(full[k], cat[k], 1e-10);
}

TEST(Degeneracy, ScalarControl) {
  const ModelParams p{2.0, 0.0, 0.0, 0};
  const Grid g = Grid::from_half_width(20.0, 2000);
  const auto e = eigen_lowest(discretize_factorized(p, g, Sector::minus), 4).values();
  const auto c = degeneracy_report(e, continuum_threshold(2.0, 0.0), 1e-9);
  ASSERT_EQ(c.size(), 2u);
  for (const auto& cl : c) EXPECT_EQ(cl.multiplicity, 2);
}

TEST(Degeneracy, InvariantUnderRefinement) {
  const ModelParams p;
  const double threshold = continuum_threshold(p.gamma, p.beta);
  std::vector<int> mult;
  for (int n : {1000, 2001}) {
    const auto c = degeneracy_report(combined_spectrum(p, Grid::from_half_width(20.0, n), 6), threshold, 1e-9);
    std::vector<int> m;
    for (const auto& cl : c) m.push_back(cl.multiplicity);
    if (mult.empty())
      mult = m;
    else
      EXPECT_EQ(m, mult);
  }
  EXPECT_EQ(mult, (std::vector<int>{2, 4}));
}
