#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qgraph;

namespace {

Forcing cosine_forcing(oracle::Rng& r, const StarGraph& g) {
  std::vector<std::vector<Complex>> c(g.size());
  for (auto& v : c)
    for (int k = 0; k < 4; ++k) v.push_back(r.gauss());
  std::vector<double> len;
  for (const auto& e : g.edges) len.push_back(e.length);
  return [c, len](std::size_t j, double x) {
    Complex s = 0.0;
    for (std::size_t k = 0; k < c[j].size(); ++k) s += c[j][k] * std::cos(std::acos(-1.0) * static_cast<double>(k) * x / len[j]);
    return s;
  };
}

CVector random_vector(oracle::Rng& r, Eigen::Index m) {
  CVector f(m);
  for (Eigen::Index i = 0; i < m; ++i) f(i) = r.gauss();
  return f;
}

// point on edge j at least `gap` away from every potential breakpoint
double interior_point(oracle::Rng& r, const EdgeSpec& e, double gap) {
  for (;;) {
    const double x = r.uniform(gap, e.length - gap);
    bool ok = true;
    for (double b : e.potential.breakpoints()) ok = ok && std::abs(x - b) > gap;
    if (ok) return x;
  }
}

}  // namespace

TEST(Resolvent, HyperbolicClosedForm) {
  const StarGraph g({EdgeSpec(1.0)});
  const auto ra = resolvent_apply(g, build_preset(VertexKind::Dirichlet, 1), -1.0, [](std::size_t, double) { return Complex(1.0); });
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const double want = 1.0 - std::cosh(x - 0.5) / std::cosh(0.5);
    EXPECT_NEAR(std::abs(ra.eval(0, x)(0) - want), 0.0, 1e-13) << x;
  }
}

TEST(Resolvent, SineModeClosedForm) {
  const double pi = std::acos(-1.0);
  const StarGraph g({EdgeSpec(1.0)});
  const auto ra = resolvent_apply(g, build_preset(VertexKind::Dirichlet, 1), 0.0,
                                  [pi](std::size_t, double x) { return Complex(std::sin(pi * x)); });
  for (std::size_t k = 0; k < ra.output.x[0].size(); k += 32) {
    const double x = ra.output.x[0][k];
    EXPECT_NEAR(std::abs(ra.output.values[0][k] - std::sin(pi * x) / (pi * pi)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ra.output_deriv.values[0][k] - std::cos(pi * x) / pi), 0.0, 1e-13);
  }
}

TEST(Resolvent, RandomTriplesSatisfyTraceAndEquation) {
  oracle::Rng r(81);
  int done = 0;
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 3));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    const Complex l = oracle::random_lambda(r);
    try {
      const auto ra = resolvent_apply(g, bc, l, cosine_forcing(r, g), 129);
      const double scale = 1.0 + ra.coeffs.cwiseAbs().maxCoeff();
      EXPECT_LT(ra.trace().cwiseAbs().maxCoeff() / scale, 1e-8) << t;
      EXPECT_LT(ra.segment_residual(), 1e-7) << t;
      EXPECT_LT(ra.solver_discrepancy, 1e-9) << t;
      ++done;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OnSpectrum);
    }
  }
  EXPECT_GT(done, 15);
}

TEST(Resolvent, FiniteDifferenceOracle) {
  oracle::Rng r(83);
  const auto g = oracle::random_graph(r, 3);
  const auto bc = oracle::random_bc(r, 3);
  const Complex l(23.0, 1.5);
  const auto v = cosine_forcing(r, g);
  const auto ra = resolvent_apply(g, bc, l, v);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& e = g.edges[j];
    for (int k = 0; k < 5; ++k) {
      const double x = interior_point(r, e, 0.02);
      const Complex u = ra.eval(j, x)(0);
      const Complex upp = oracle::second_difference([&](double s) { return ra.eval(j, s)(0); }, x, 2e-3);
      const Complex res = -upp + (e.potential(x) - l) * u - v(j, x);
      EXPECT_LT(std::abs(res), 1e-6 * (1.0 + std::abs(v(j, x)) + std::abs(l * u))) << "edge " << j << " x " << x;
    }
  }
}

TEST(Resolvent, SampledForcingMatchesCallable) {
  oracle::Rng r(85);
  const auto g = oracle::random_graph(r, 2);
  const auto bc = oracle::random_bc(r, 2);
  const Forcing lin = [](std::size_t j, double x) { return Complex(1.0 + x, static_cast<double>(j)); };
  const auto a = resolvent_apply(g, bc, Complex(5.0, 1.0), lin);
  const auto b = resolvent_apply(g, bc, Complex(5.0, 1.0), sample(g, lin));
  EXPECT_LT((a.coeffs - b.coeffs).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + a.coeffs.cwiseAbs().maxCoeff()));
}

TEST(Resolvent, RefusesSpectralParameterOnSpectrum) {
  const double pi = std::acos(-1.0);
  const StarGraph g({EdgeSpec(1.0)});
  try {
    resolvent_apply(g, build_preset(VertexKind::Dirichlet, 1), pi * pi, edge_indicator(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OnSpectrum);
  }
}

TEST(Projections, KirchhoffAndRobinRanks) {
  const auto k = build_projections(build_preset(VertexKind::Kirchhoff, 2));
  EXPECT_EQ(k.rank_D(), 3);
  EXPECT_EQ(k.rank_N(), 1);
  EXPECT_EQ(k.rank_R(), 0);
  const auto rb = build_projections(compose_bc(VertexCondition::robin({0.7, -1.3}), VertexCondition::robin({0.7, -1.3}), 2));
  EXPECT_EQ(rb.rank_D(), 0);
  EXPECT_EQ(rb.rank_N(), 0);
  EXPECT_EQ(rb.rank_R(), 4);
  const auto d = build_projections(build_preset(VertexKind::Dirichlet, 3));
  EXPECT_LT(max_abs(d.PD - CMatrix::Identity(6, 6)), 1e-14);
  EXPECT_LT(max_abs(d.U + CMatrix::Identity(6, 6)), 1e-14);
}

TEST(Projections, InvariantsOnRandomConditions) {
  oracle::Rng r(87);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto ps = build_projections(oracle::random_bc(r, n));
    EXPECT_LT(check_projections(ps).max(), 1e-10) << t;
  }
}

TEST(Projections, TraceRelationsOfBoundaryValueSolutions) {
  oracle::Rng r(89);
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 4));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    const CVector f = random_vector(r, static_cast<Eigen::Index>(2 * n));
    const auto sol = solve_trace_bvp(g, bc, Complex(r.uniform(-5, 80), r.uniform(0.1, 2)), f);
    const auto bd = sol.boundary_data();
    const double scale = 1.0 + dirichlet_trace(bd).norm() + neumann_trace(bd).norm();
    EXPECT_LT(projection_trace_residual(build_projections(bc), bd, f) / scale, 1e-8) << t;
  }
}

// alpha1 - i alpha2 = 0 here, but such data already fail self-adjointness
TEST(Projections, SingularCombinationRejectedAsInvalid) {
  BoundaryConditions bc = build_preset(VertexKind::Dirichlet, 1);
  bc.alpha1(0, 0) = Complex(0.0, 1.0);
  bc.alpha2(0, 0) = 1.0;
  try {
    build_projections(bc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSelfAdjoint);
  }
}

TEST(InnerProduct, BoundaryFormulaBothConjugationReadings) {
  oracle::Rng r(91);
  int literal = 0;
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 3));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    const CVector f = random_vector(r, static_cast<Eigen::Index>(2 * n));
    const auto v = cosine_forcing(r, g);
    const Complex l = t % 2 ? Complex(r.uniform(-5, 80), 0.0) : Complex(r.uniform(-5, 80), r.uniform(0.5, 3.0));
    try {
      EXPECT_LT(inner_product_check(g, bc, l, f, v, InnerProductForm::Adjoint).residual, 1e-8) << t;
      const Forcing vr = [v](std::size_t j, double x) { return Complex(v(j, x).real(), 0.0); };
      const CVector fr = f.real().cast<Complex>();
      const auto lit = inner_product_check(g, bc, l, fr, vr, InnerProductForm::Literal);
      const bool real_data = bc.alpha1.imag().isZero(0.0) && bc.alpha2.imag().isZero(0.0) &&
                             bc.beta1.imag().isZero(0.0) && bc.beta2.imag().isZero(0.0);
      if (l.imag() == 0.0 && real_data) {
        EXPECT_LT(lit.residual, 1e-8) << t;
        ++literal;
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OnSpectrum);
    }
  }
  EXPECT_GT(literal, 3);
}

TEST(UGamma, FormulaAgreesWithDirectSolve) {
  oracle::Rng r(93);
  for (int t = 0; t < 12; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 3));
    const auto g = oracle::random_graph(r, n);
    const auto bc = oracle::random_bc(r, n);
    const Complex l(r.uniform(-5, 80), r.uniform(0.2, 2.0));
    const auto res = u_gamma(g, bc, l, static_cast<std::size_t>(r.integer(0, static_cast<int>(2 * n) - 1)));
    double scale = 1.0;
    for (const auto& e : res.direct)
      for (const auto& s : e) scale = std::max(scale, std::abs(s(0)));
    EXPECT_LT(res.discrepancy / scale, 1e-7) << t;
  }
}

TEST(UGamma, DerivativeAtCutIsStarMap) {
  const auto sr = split_graph(oracle::barrier_end_graph(), build_preset(VertexKind::Kirchhoff, 2),
                              {SplitMode::SingleCut, {{0, 1.0 / 3.0}}});
  const auto& p = sr.get(Region::Omega2, {CutCondition::D});
  const double l = 20.0;
  const auto res = u_gamma(p.graph, p.bc, l, 0);
  const Complex m2 = map_M2(p, 0, l).value;
  EXPECT_LT(std::abs(res.formula[0].back()(1) - m2), 1e-8 * (1.0 + std::abs(m2)));
  EXPECT_LT(std::abs(res.formula[0].back()(0) - 1.0), 1e-10);
}
