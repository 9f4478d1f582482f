#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qgraph;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// (-1)^n det F against det C, both at the origin
double sign_relation_residual(const StarGraph& g, const BoundaryConditions& bc, Complex l) {
  const auto fr = fundamental_frame(g, bc, l);
  const Complex f = det(fr.F()), c = det(c_matrix(fr, bc));
  const double sign = g.size() % 2 ? -1.0 : 1.0;
  return std::abs(sign * f - c) / std::max({std::abs(c), std::abs(f), 1e-300});
}

}  // namespace

TEST(Evans, DirichletIntervalClosedForm) {
  const StarGraph g({EdgeSpec(1.3)});
  const auto bc = build_preset(VertexKind::Dirichlet, 1);
  for (double l : {-4.0, 0.5, 7.0, 33.0}) {
    const Complex k = std::sqrt(Complex(l));
    EXPECT_LT(rel(evans(g, bc, l), std::sin(k * 1.3) / k), 1e-13) << l;
  }
}

TEST(Evans, NeumannIntervalClosedForm) {
  const StarGraph g({EdgeSpec(0.8)});
  const auto bc = build_preset(VertexKind::Neumann, 1);
  for (double l : {3.0, 21.0}) {
    const double k = std::sqrt(l);
    // y = -cos(kx), z = -cos(k(x - L)); det at 0 = k sin(kL)
    EXPECT_LT(rel(evans(g, bc, l), k * std::sin(k * 0.8)), 1e-13) << l;
  }
}

TEST(Evans, PieceFunctionsOfBarrierExample) {
  const auto g = oracle::barrier_end_graph();
  const auto sr = split_graph(g, build_preset(VertexKind::Kirchhoff, 2), {SplitMode::SingleCut, {{0, 1.0 / 3.0}}});
  const auto& p1 = sr.get(Region::Omega1, {CutCondition::D});
  const auto& p2 = sr.get(Region::Omega2, {CutCondition::D});
  for (double l : {5.5, 12.0, 40.0, 59.0}) {
    EXPECT_LT(rel(evans(p1.graph, p1.bc, l), oracle::e_omega1(l)), 1e-12) << l;
    EXPECT_LT(rel(evans(p2.graph, p2.bc, l), oracle::e_omega2(l)), 1e-12) << l;
  }
}

TEST(Evans, ZerosMatchIndependentSecularFunction) {
  const auto g = oracle::barrier_end_graph();
  const auto bc = build_preset(VertexKind::Kirchhoff, 2);
  const auto want = oracle::scan_zeros([](double l) { return oracle::secular_single(l); }, 5.0, 60.0);
  const auto got = count_eigenvalues(g, bc, 5.0, 60.0);
  ASSERT_EQ(got.zeros.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.zeros[i].location, want[i], 1e-8);
}

TEST(Evans, DirichletSpectrumIsSquaresOfPi) {
  const StarGraph g({EdgeSpec(1.0)});
  const auto rep = count_eigenvalues(g, build_preset(VertexKind::Dirichlet, 1), 1.0, 100.0);
  ASSERT_EQ(rep.count, 3);
  const double pi = std::acos(-1.0);
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(rep.zeros[k - 1].location, k * k * pi * pi, 1e-9);
}

bool real_data(const BoundaryConditions& bc) {
  return bc.alpha1.imag().cwiseAbs().maxCoeff() == 0.0 && bc.alpha2.imag().cwiseAbs().maxCoeff() == 0.0;
}

// (-1)^n det F det P = det C det(a1 a1* + a2 a2*), P = [a1 a2; -a2 a1]; exact for any valid data
double general_sign_residual(const StarGraph& g, const BoundaryConditions& bc, Complex l) {
  const auto fr = fundamental_frame(g, bc, l);
  const auto n = static_cast<Eigen::Index>(g.size());
  CMatrix p(2 * n, 2 * n);
  p << bc.alpha1, bc.alpha2, -bc.alpha2, bc.alpha1;
  const Complex a = det(CMatrix(bc.alpha1 * bc.alpha1.adjoint() + bc.alpha2 * bc.alpha2.adjoint()));
  const double sign = n % 2 ? -1.0 : 1.0;
  const Complex lhs = sign * det(fr.F()) * det(p), rhs = det(c_matrix(fr, bc)) * a;
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

TEST(Evans, SignRelationForRealConditions) {
  oracle::Rng r(21);
  int real = 0;
  for (int t = 0; t < 400 && real < 200; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    if (!real_data(bc)) continue;
    ++real;
    EXPECT_LT(sign_relation_residual(g, bc, oracle::random_lambda(r)), 1e-9) << "trial " << t;
  }
  EXPECT_GT(real, 50);
}

TEST(Evans, ComplexConditionsCarryUnimodularFactor) {
  oracle::Rng r(22);
  int off = 0;
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    const Complex l = oracle::random_lambda(r);
    EXPECT_LT(general_sign_residual(g, bc, l), 1e-9) << "trial " << t;
    const auto fr = fundamental_frame(g, bc, l);
    const double sign = n % 2 ? -1.0 : 1.0;
    const Complex ratio = det(c_matrix(fr, bc)) / (sign * det(fr.F()));
    EXPECT_NEAR(std::abs(ratio), 1.0, 1e-9) << "trial " << t;
    off += std::abs(ratio - 1.0) > 1e-6 ? 1 : 0;
  }
  EXPECT_GT(off, 0);
}

TEST(Evans, IndependentOfEvaluationPoint) {
  oracle::Rng r(23);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    EXPECT_LT(x_independence_check(g, bc, oracle::random_lambda(r), oracle::random_points(r, g, 5)), 1e-9);
  }
}

TEST(Evans, FrameColumnsSatisfyTheirBoundaryConditions) {
  oracle::Rng r(29);
  const auto g = oracle::random_graph(r, 3);
  const auto bc = oracle::random_bc(r, 3);
  const Complex l(17.0, 0.4);
  const auto a0 = fundamental_frame(g, bc, l);
  const auto aL = fundamental_frame(g, bc, l, outer_point(g));
  // origin condition annihilates Y
  EXPECT_LT(max_abs(bc.alpha1 * a0.Y + bc.alpha2 * a0.Yp), 1e-12);
  // each z_ii satisfies its outer condition
  for (Eigen::Index i = 0; i < 3; ++i)
    EXPECT_LT(std::abs(bc.beta1(i) * aL.Z(i, i) + bc.beta2(i) * aL.Zp(i, i)), 1e-12);
  EXPECT_THROW(c_matrix(aL, bc), Error);
}

TEST(TraceBvp, SolutionHasPrescribedTrace) {
  oracle::Rng r(31);
  for (int t = 0; t < 30; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    CVector f(2 * static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = r.gauss();
    const Complex l(r.uniform(-5, 80), r.uniform(0.1, 2.0));
    const auto sol = solve_trace_bvp(g, bc, l, f);
    EXPECT_LT((gamma_trace(bc, sol.boundary_data()) - f).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + f.norm()));
  }
}

TEST(TraceBvp, SingularAtEigenvalue) {
  const StarGraph g({EdgeSpec(1.0)});
  const double pi = std::acos(-1.0);
  try {
    solve_trace_bvp(g, build_preset(VertexKind::Dirichlet, 1), pi * pi, CVector::Ones(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OnSpectrum);
  }
}
