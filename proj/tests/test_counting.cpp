#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qgraph;

namespace {

std::vector<int> piece_counts(const CountingIdentity& id) {
  std::vector<int> c;
  for (const auto& p : id.pieces) c.push_back(p.report.count);
  return c;
}

// Real boundary data so the Evans function is real on the real axis.
BoundaryConditions real_bc(oracle::Rng& r, std::size_t n) {
  switch (r.integer(0, 4)) {
    case 0: return build_preset(VertexKind::Kirchhoff, n);
    case 1: return oracle::kirchhoff_neumann(n);
    case 2: return build_preset(VertexKind::Dirichlet, n);
    case 3: return compose_bc(VertexCondition::neumann(), VertexCondition::dirichlet(), n);
    default: {
      std::vector<double> th;
      for (std::size_t i = 0; i < n; ++i) th.push_back(r.uniform(-3.0, 3.0));
      return build_preset(VertexKind::Robin, n, th);
    }
  }
}

// verify_counting on [a, b], moving b slightly whenever it lands on a spectrum
CountingIdentity counted(const StarGraph& g, const BoundaryConditions& bc, const SplitSpec& s, double a, double b) {
  for (int k = 0;; ++k) {
    try {
      return verify_counting(g, bc, s, a, b + 1e-3 * k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EndpointOnSpectrum || k > 5) throw;
    }
  }
}

}  // namespace

TEST(CountZeros, DirichletIntervalSpectrum) {
  const auto rep = count_zeros([](double l) { return std::sin(std::sqrt(l)) / std::sqrt(l); }, 5.0, 60.0);
  const double pi = std::acos(-1.0);
  ASSERT_EQ(rep.count, 2);
  EXPECT_NEAR(rep.zeros[0].location, pi * pi, 1e-9);
  EXPECT_NEAR(rep.zeros[1].location, 4 * pi * pi, 1e-9);
}

TEST(CountZeros, NoZeros) {
  EXPECT_EQ(count_zeros([](double l) { return 2.0 + std::sin(l); }, 0.0, 50.0).count, 0);
}

TEST(CountZeros, TangentialZeroCountsTwice) {
  const auto rep = count_zeros([](double l) { return (l - 2.3) * (l - 2.3); }, 0.0, 5.0);
  ASSERT_EQ(rep.zeros.size(), 1u);
  EXPECT_EQ(rep.zeros[0].multiplicity, 2);
  EXPECT_NEAR(rep.zeros[0].location, 2.3, 1e-5);
}

TEST(CountZeros, CloseZerosWarn) {
  CountOptions o;
  o.grid = 64;
  const auto rep = count_zeros([](double l) { return (l - 1.0) * (l - 1.01); }, 0.0, 5.0, o);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(CountZeros, EndpointPolicies) {
  auto f = [](double l) { return std::sin(l); };
  const double pi = std::acos(-1.0);
  CountOptions o;
  o.endpoints = EndpointPolicy::Throw;
  try {
    count_zeros(f, 1.0, pi, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EndpointOnSpectrum);
  }
  const auto rep = count_zeros(f, 1.0, pi);
  EXPECT_EQ(rep.count, 0);
  EXPECT_FALSE(rep.warnings.empty());
  EXPECT_THROW(count_zeros(f, 2.0, 1.0), Error);
}

TEST(CountZeros, AdditiveAcrossSplitPoint) {
  const auto g = oracle::barrier_end_graph();
  const auto bc = build_preset(VertexKind::Kirchhoff, 2);
  const int whole = count_eigenvalues(g, bc, 5.0, 60.0).count;
  EXPECT_EQ(count_eigenvalues(g, bc, 5.0, 31.0).count + count_eigenvalues(g, bc, 31.0, 60.0).count, whole);
}

TEST(CountZeros, StableUnderGridDoubling) {
  const auto g = oracle::barrier_interior_graph();
  const auto bc = oracle::kirchhoff_neumann(2);
  CountOptions o;
  o.grid = 600;
  const int a = count_eigenvalues(g, bc, 5.0, 60.0, o).count;
  o.grid = 1200;
  EXPECT_EQ(count_eigenvalues(g, bc, 5.0, 60.0, o).count, a);
}

TEST(Identity, BarrierAtWireEnd) {
  const auto id = verify_counting(oracle::barrier_end_graph(), build_preset(VertexKind::Kirchhoff, 2),
                                  {SplitMode::SingleCut, {{0, 1.0 / 3.0}}}, 5.0, 60.0);
  EXPECT_EQ(id.full.count, 4);
  EXPECT_EQ(piece_counts(id), (std::vector<int>{1, 3}));
  EXPECT_EQ(id.map.delta_N, 0);
  EXPECT_EQ(id.map.count, 4);
  EXPECT_EQ(id.map.pole_count(), 4);
  EXPECT_TRUE(id.holds);
  EXPECT_EQ(id.equation(), "4 = 1 + 3 + 0");
}

TEST(Identity, InteriorBarrierWithDoublePole) {
  const auto id = verify_counting(oracle::barrier_interior_graph(), oracle::kirchhoff_neumann(2),
                                  {SplitMode::DoubleSameWire, {{0, 0.75}, {0, 0.25}}}, 5.0, 60.0);
  EXPECT_EQ(id.full.count, 4);
  EXPECT_EQ(piece_counts(id), (std::vector<int>{1, 1, 2}));
  EXPECT_EQ(id.map.delta_N, 0);
  EXPECT_TRUE(id.holds);
  int doubles = 0;
  for (const auto& p : id.map.poles)
    if (p.multiplicity == 2) {
      ++doubles;
      EXPECT_NEAR(p.location, 4.0 * std::pow(std::acos(-1.0), 2), 1e-6);
    }
  EXPECT_EQ(doubles, 1);
}

TEST(Identity, TwoWiresBothIntervals) {
  const auto g = oracle::two_wire_graph();
  const auto bc = build_preset(VertexKind::Kirchhoff, 2);
  const SplitSpec s{SplitMode::DoubleTwoWires, {{0, 0.5}, {1, 0.5}}};
  const auto wide = verify_counting(g, bc, s, 3.0, 60.0);
  EXPECT_EQ(wide.equation(), "4 = 1 + 1 + 1 + 1");
  EXPECT_TRUE(wide.holds);
  const auto narrow = verify_counting(g, bc, s, 5.0, 60.0);
  EXPECT_EQ(narrow.equation(), "3 = 1 + 1 + 1 + 0");
  EXPECT_TRUE(narrow.holds);
}

TEST(Identity, EndpointOnSpectrumIsAnError) {
  const double pi = std::acos(-1.0);
  // 4 pi^2 is a Dirichlet eigenvalue of the inner interval of the interior example
  try {
    verify_counting(oracle::barrier_interior_graph(), oracle::kirchhoff_neumann(2),
                    {SplitMode::DoubleSameWire, {{0, 0.75}, {0, 0.25}}}, 5.0, 4 * pi * pi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EndpointOnSpectrum);
  }
}

TEST(Identity, RandomSingleSplits) {
  oracle::Rng r(71);
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<std::size_t>(r.integer(1, 3));
    const auto g = oracle::random_graph(r, n);
    const auto bc = real_bc(r, n);
    const auto id = counted(g, bc, oracle::random_split(r, g, SplitMode::SingleCut), 1.0, 80.0);
    EXPECT_TRUE(id.holds) << "trial " << t << ": " << id.equation();
  }
}

TEST(Identity, RandomDoubleSplits) {
  oracle::Rng r(73);
  for (auto mode : {SplitMode::DoubleSameWire, SplitMode::DoubleTwoWires}) {
    for (int t = 0; t < 25; ++t) {
      const auto n = static_cast<std::size_t>(r.integer(mode == SplitMode::DoubleTwoWires ? 2 : 1, 3));
      const auto g = oracle::random_graph(r, n);
      const auto bc = real_bc(r, n);
      const auto id = counted(g, bc, oracle::random_split(r, g, mode), 1.0, 80.0);
      EXPECT_TRUE(id.holds) << "trial " << t << ": " << id.equation();
    }
  }
}
