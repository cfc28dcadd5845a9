#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "spinshape/fields.hpp"

using namespace spinshape;

TEST(Superpotential, ValuesAndDomain) {
  EXPECT_EQ(superpotential_case2(0.0, 2.5), 0.0);
  EXPECT_NEAR(superpotential_case2(1.0, 2.5), 1.9039854, 1e-7);
  EXPECT_NEAR(superpotential_case2(40.0, 2.5), 2.5, 1e-15);
  EXPECT_THROW(superpotential_case2(std::numeric_limits<double>::infinity(), 2.5), DomainError);
  EXPECT_THROW(superpotential_case2(std::nan(""), 2.5), DomainError);
  EXPECT_THROW(superpotential_case2(0.0, -1.0), DomainError);
  EXPECT_NEAR(superpotential_case2_derivative(0.0, 2.5), 2.5, 1e-15);
}

TEST(GProfile, ValuesAndIntegratingFactor) {
  EXPECT_EQ(g_profile(0.0, 1.0), 1.0);
  EXPECT_EQ(g_profile(0.0, 0.0), 0.0);
  // g(z)/g(0) = exp(-int_0^z tanh), by Simpson quadrature
  for (double z : {0.5, 1.0, 2.0}) {
    const int m = 2000;
    const double h = z / m;
    double s = std::tanh(0.0) + std::tanh(z);
    for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * std::tanh(k * h);
    const double integral = s * h / 3.0;
    EXPECT_NEAR(g_profile(z, 1.0) / g_profile(0.0, 1.0), std::exp(-integral), 1e-12) << z;
  }
}

TEST(PartnerFields, ReferenceValues) {
  const ModelParams p{2.5, 1.0, 1.0, 0};
  const auto f = partner_fields(p);
  EXPECT_NEAR(f.scalar_potential(Sector::minus, 0.0), -2.0, 1e-15);
  const Vec3 b0 = f.magnetic_field(Sector::minus, 0.0);
  EXPECT_EQ(b0.x, 0.0);
  EXPECT_EQ(b0.y, 0.0);
  EXPECT_EQ(b0.z, 0.0);
  for (double z : {-3.0, -0.4, 0.7, 5.0}) {
    for (Sector s : {Sector::minus, Sector::plus}) {
      // b = x component is 2 gamma beta tanh z in both sectors
      EXPECT_NEAR(f.magnetic_field(s, z).x, 2.0 * 2.5 * 1.0 * std::tanh(z), 1e-14);
      EXPECT_EQ(f.magnetic_field(s, z).y, 0.0);
      const double w = 2.5 * std::tanh(z), dw = 2.5 / std::pow(std::cosh(z), 2), g = 1.0 / std::cosh(z);
      const double sign = s == Sector::plus ? 1.0 : -1.0;
      EXPECT_NEAR(f.scalar_potential(s, z), w * w + sign * dw + 0.25 * (g * g + 1.0), 1e-14);
    }
  }
}

TEST(PartnerFields, ShapeInvarianceAtFieldLevel) {
  const ModelParams p{2.5, 1.0, 1.0, 0};
  const auto flow = parameter_flow(p, 1);
  const auto f0 = partner_fields(p);
  const auto f1 = partner_fields(flowed(p, flow[1], 1));
  for (int i = -200; i <= 200; ++i) {
    const double z = 0.1 * i;
    EXPECT_NEAR(f0.scalar_potential(Sector::plus, z), f1.scalar_potential(Sector::minus, z) + flow[1].epsilon, 1e-12);
    const Vec3 a = f0.magnetic_field(Sector::plus, z);
    const Vec3 b = f1.magnetic_field(Sector::minus, z);
    EXPECT_NEAR(a.x, b.x, 1e-12);
    EXPECT_NEAR(a.z, b.z, 1e-12);
  }
}

TEST(PartnerFields, MisprintedConstantDiffers) {
  // The asymptotic scalar potential is gamma^2 + beta^2/4, not gamma^2 + beta^2.
  const ModelParams p{2.5, 1.0, 1.0, 0};
  const auto f = partner_fields(p);
  EXPECT_NEAR(f.scalar_potential(Sector::minus, 40.0), 2.5 * 2.5 + 0.25, 1e-12);
  EXPECT_GT(std::abs(f.scalar_potential(Sector::minus, 40.0) - (2.5 * 2.5 + 1.0)), 0.7);
}

TEST(GProfile, IndependentOfGammaBeta) {
  const Model m;
  const MatrixSuperpotential a({2.5, 1.0, 1.0, 0}, m);
  const MatrixSuperpotential b({7.0, 0.2, 1.0, 0}, m);
  for (double z : {-1.0, 0.3, 2.0}) {
    EXPECT_NEAR(std::abs(a(z)(0, 0) - cplx(2.5 * std::tanh(z)) - (b(z)(0, 0) - cplx(7.0 * std::tanh(z)))), 0.0, 1e-14);
  }
}

TEST(MatrixSuperpotential, SymmetryAndParity) {
  const MatrixSuperpotential m({2.5, 1.0, 1.0, 0});
  for (double z : {0.2, 1.0, 3.0}) {
    const Mat2 a = m(z);
    const Mat2 b = m(-z);
    EXPECT_EQ(a(0, 1), a(1, 0));
    EXPECT_TRUE(a.is_real());
    // W part odd, g part even: diagonal mean flips, splitting stays
    EXPECT_NEAR((a(0, 0) + a(1, 1)).real(), -(b(0, 0) + b(1, 1)).real(), 1e-15);
    EXPECT_NEAR((a(0, 0) - a(1, 1)).real(), (b(0, 0) - b(1, 1)).real(), 1e-15);
  }
}

TEST(ParameterFlow, ReferenceStep) {
  const auto flow = parameter_flow({2.5, 1.0, 1.0, 0}, 1);
  ASSERT_EQ(flow.size(), 2u);
  EXPECT_EQ(flow[0].epsilon, 0.0);
  EXPECT_DOUBLE_EQ(flow[1].gamma, 1.5);
  EXPECT_NEAR(flow[1].beta, 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(flow[1].epsilon, 32.0 / 9.0, 1e-14);
  EXPECT_NEAR(flow[1].gamma * flow[1].beta, 2.5, 1e-15);
}

TEST(ParameterFlow, ZeroLengthAndInvariant) {
  const auto flow = parameter_flow({4.3, 0.7, 1.0, 0}, 0);
  ASSERT_EQ(flow.size(), 1u);
  EXPECT_EQ(flow[0].gamma, 4.3);
  EXPECT_EQ(flow[0].beta, 0.7);
  const auto long_flow = parameter_flow({7.7, 1.3, 1.0, 0}, 7);
  for (const auto& s : long_flow) EXPECT_LT(std::abs(s.gamma * s.beta / (7.7 * 1.3) - 1.0), 1e-14);
}

TEST(ParameterFlow, LeavesAdmissibleRegion) {
  EXPECT_THROW(parameter_flow({2.5, 1.0, 1.0, 0}, 3), InadmissibleError);
  EXPECT_THROW(parameter_flow({0.8, 1.0, 1.0, 0}, 1), InadmissibleError);
  EXPECT_THROW(parameter_flow({-1.0, 1.0, 1.0, 0}, 0), DomainError);
}

TEST(ShapeInvariance, ResidualsVanish) {
  const Grid g = Grid::from_half_width(20.0, 2000);
  const auto r = shape_invariance_residuals({2.5, 1.0, 1.0, 0}, g);
  EXPECT_LT(r.scalar, 1e-12);
  EXPECT_LT(r.vector_a, 1e-12);
  EXPECT_LT(r.vector_b, 1e-12);
  const auto r0 = shape_invariance_residuals({2.5, 1.0, 0.0, 0}, g);
  EXPECT_EQ(r0.vector_a, 0.0);
}

TEST(ShapeInvariance, WrongFlowIsDetected) {
  const Grid g = Grid::from_half_width(20.0, 2000);
  const ModelParams p{2.5, 1.0, 1.0, 0};
  auto step = parameter_flow(p, 1)[1];
  step.beta = p.beta;  // beta_1 = beta
  const auto r = shape_invariance_residuals(p, step, g);
  double expected = 0.0;
  for (int i = 0; i < g.size(); ++i)
    expected = std::max(expected, std::abs(2.5 * 1.0 - 1.5 * 1.0) * std::abs(std::tanh(g.node(i))));
  EXPECT_NEAR(r.vector_b, expected, 1e-12);
  EXPECT_GT(r.vector_b, 0.9);
}

TEST(Frame, Validation) {
  FrameVectors f;
  EXPECT_NO_THROW(f.validate());
  EXPECT_TRUE(f.is_real());
  f.b = {0.0, 1.0, 0.0};
  EXPECT_FALSE(f.is_real());
  f.b = {0.0, 0.0, 1.0};
  EXPECT_THROW(f.validate(), DomainError);
}
