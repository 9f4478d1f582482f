#ifndef QGRAPH_MAPS_HPP
#define QGRAPH_MAPS_HPP

#include <cmath>
#include <vector>

#include "evans.hpp"

namespace qgraph {

// Pole handling: a map is treated as singular when its denominator Evans function is small.
// With `scale` > 0 the test is |E| < tol * scale (scale = median |E| over a sweep window);
// otherwise the Hadamard bound of the frame is used with a much tighter relative tolerance.
struct PoleOptions {
  double tol = 1e-6;
  double scale = 0.0;
  double hadamard_tol = 1e-11;
};

inline double hadamard_bound(const CMatrix& f) { return f.colwise().norm().prod(); }

inline bool is_pole(Complex denom, const CMatrix& frame, const PoleOptions& opt) {
  if (opt.scale > 0.0) return std::abs(denom) < opt.tol * opt.scale;
  return std::abs(denom) <= opt.hadamard_tol * hadamard_bound(frame);
}

enum class MapSide { Outer, Star };

/** \brief One-sided Dirichlet-to-Neumann map value, from its defining problem and from Evans quotients. */
struct OneSidedMap {
  MapSide side;
  Complex value;     // definition path
  Complex quotient;  // Evans-quotient path
  Complex lambda;
  Complex denominator_evans;  // Dirichlet-variant Evans function
  Complex numerator_evans;    // Neumann-variant Evans function

  double discrepancy() const { return std::abs(value - quotient) / std::max(std::abs(value), 1e-300); }
};

// Same piece with the condition at the cut replaced.
inline BoundaryConditions with_origin_condition(const BoundaryConditions& bc, CutCondition c) {
  BoundaryConditions out = bc;
  Complex v, d;
  cut_coefficients(c, v, d);
  out.alpha1 = CMatrix::Constant(1, 1, v);
  out.alpha2 = CMatrix::Constant(1, 1, d);
  return out;
}

inline BoundaryConditions with_outer_condition(const BoundaryConditions& bc, std::size_t edge, CutCondition c) {
  BoundaryConditions out = bc;
  Complex v, d;
  cut_coefficients(c, v, d);
  out.beta1(static_cast<Eigen::Index>(edge)) = v;
  out.beta2(static_cast<Eigen::Index>(edge)) = d;
  return out;
}

// Interval with the cut at its origin; the outer condition is taken from `bc`.
// M1 = -z'(cut)/z(cut) where z satisfies the outer condition.
// With canonical Evans functions the quotient reads M1 = -E_N / E_D.
inline OneSidedMap map_M1(const StarGraph& interval, const BoundaryConditions& bc, Complex lambda,
                          const PoleOptions& opt = {}) {
  if (interval.size() != 1) throw Error(ErrorCode::DimensionMismatch, "M1 is defined on a single interval");
  const auto bd = with_origin_condition(bc, CutCondition::D);
  const auto bn = with_origin_condition(bc, CutCondition::N);
  const auto fd = fundamental_frame(interval, bd, lambda);
  const Complex ed = det(fd.F());
  if (is_pole(ed, fd.F(), opt)) throw Error(ErrorCode::PoleAtLambda, "lambda is an eigenvalue of the Dirichlet piece");
  const Complex en = evans(interval, bn, lambda);
  const Complex z = fd.Z(0, 0), zp = fd.Zp(0, 0);
  return {MapSide::Outer, -zp / z, -en / ed, lambda, ed, en};
}

inline OneSidedMap map_M1(const Subproblem& p, Complex lambda, const PoleOptions& opt = {}) {
  return map_M1(p.graph, p.bc, lambda, opt);
}

// Star with the cut at the far end of `edge`. M2 = u_j'(cut) where u solves the star problem with
// u_j(cut) = 1 and all other conditions homogeneous. Canonical quotient: M2 = +E_N / E_D.
inline OneSidedMap map_M2(const StarGraph& star, const BoundaryConditions& bc, std::size_t edge, Complex lambda,
                          const PoleOptions& opt = {}) {
  if (edge >= star.size()) throw Error(ErrorCode::DimensionMismatch, "cut edge out of range");
  const auto bd = with_outer_condition(bc, edge, CutCondition::D);
  const auto bn = with_outer_condition(bc, edge, CutCondition::N);
  const auto fd = fundamental_frame(star, bd, lambda);
  const Complex ed = det(fd.F());
  if (is_pole(ed, fd.F(), opt)) throw Error(ErrorCode::PoleAtLambda, "lambda is an eigenvalue of the Dirichlet piece");
  const Complex en = evans(star, bn, lambda);
  CVector f = CVector::Zero(static_cast<Eigen::Index>(2 * star.size()));
  f(static_cast<Eigen::Index>(edge)) = 1.0;
  const auto sol = solve_trace_bvp(star, bd, lambda, f, 0.0);
  const Complex up = sol.state(edge, star.edges[edge].length)(1);
  return {MapSide::Star, up, en / ed, lambda, ed, en};
}

inline OneSidedMap map_M2(const Subproblem& p, std::size_t edge, Complex lambda, const PoleOptions& opt = {}) {
  return map_M2(p.graph, p.bc, edge, lambda, opt);
}

inline Complex two_sided_sum(const OneSidedMap& m1, const OneSidedMap& m2) {
  if (m1.lambda != m2.lambda) throw Error(ErrorCode::DimensionMismatch, "maps evaluated at different lambda");
  return m1.value + m2.value;
}

enum class TwoSidedGeometry { SameWire, TwoWires };

struct TwoSidedMap2x2 {
  Mat2 m1, m2;
  TwoSidedGeometry geometry;
  Complex lambda;

  Complex det_sum() const { return (m1 + m2).determinant(); }
};

// Interval map from the transfer matrix T over [s2, s1]:
// u(s1)=1,u(s2)=0 and w(s1)=0,w(s2)=1 give [[u'(s1), w'(s1)], [-u'(s2), -w'(s2)]].
inline Mat2 interval_map_matrix(const Mat2& t) {
  Mat2 m;
  m << t(1, 1) / t(0, 1), -1.0 / t(0, 1), -1.0 / t(0, 1), t(0, 0) / t(0, 1);
  return m;
}

inline TwoSidedMap2x2 two_sided_2x2_same_wire(const SplitResult& sr, Complex lambda, const PoleOptions& opt = {}) {
  if (sr.spec.mode != SplitMode::DoubleSameWire) throw Error(ErrorCode::InvalidSplit, "needs a same-wire split");
  using CC = CutCondition;
  const std::size_t j = sr.spec.cuts[0].edge;
  const Complex M1 = map_M1(sr.get(Region::Omega1, {CC::D}), lambda, opt).value;
  const Complex M2t = map_M2(sr.get(Region::Omega2Tilde, {CC::D}), j, lambda, opt).value;
  const auto& inner = sr.get(Region::Omega1Tilde, {CC::D, CC::D});
  const auto& e = inner.graph.edges[0];
  const Mat2 t = transfer(e, lambda, 0.0, e.length);
  const auto fi = fundamental_frame(inner.graph, inner.bc, lambda);
  if (is_pole(det(fi.F()), fi.F(), opt))
    throw Error(ErrorCode::PoleAtLambda, "lambda is a Dirichlet eigenvalue of the inner interval");
  TwoSidedMap2x2 out{interval_map_matrix(t), Mat2::Zero(), TwoSidedGeometry::SameWire, lambda};
  out.m2(0, 0) = M1;
  out.m2(1, 1) = M2t;
  return out;
}

inline TwoSidedMap2x2 two_sided_2x2_two_wires(const SplitResult& sr, Complex lambda, const PoleOptions& opt = {}) {
  if (sr.spec.mode != SplitMode::DoubleTwoWires) throw Error(ErrorCode::InvalidSplit, "needs a two-wire split");
  using CC = CutCondition;
  const std::size_t j1 = sr.spec.cuts[0].edge, j2 = sr.spec.cuts[1].edge;
  TwoSidedMap2x2 out{Mat2::Zero(), Mat2::Zero(), TwoSidedGeometry::TwoWires, lambda};
  out.m1(0, 0) = map_M1(sr.get(Region::Omega1, {CC::D}), lambda, opt).value;
  out.m1(1, 1) = map_M1(sr.get(Region::Omega1Tilde, {CC::D}), lambda, opt).value;

  const auto& res = sr.get(Region::Omega2Tilde, {CC::D, CC::D});
  const auto fr = fundamental_frame(res.graph, res.bc, lambda);
  if (is_pole(det(fr.F()), fr.F(), opt)) throw Error(ErrorCode::PoleAtLambda, "lambda is an eigenvalue of the residual star");
  const auto n2 = static_cast<Eigen::Index>(2 * res.graph.size());
  CVector fu = CVector::Zero(n2), fw = CVector::Zero(n2);
  fu(static_cast<Eigen::Index>(j1)) = 1.0;
  fw(static_cast<Eigen::Index>(j2)) = 1.0;
  const auto u = solve_trace_bvp(res.graph, res.bc, lambda, fu, 0.0);
  const auto w = solve_trace_bvp(res.graph, res.bc, lambda, fw, 0.0);
  const double s1 = res.graph.edges[j1].length, s2 = res.graph.edges[j2].length;
  out.m2 << u.state(j1, s1)(1), w.state(j1, s1)(1), u.state(j2, s2)(1), w.state(j2, s2)(1);
  return out;
}

// ---------------------------------------------------------------------------
// Factorization residuals

inline double verify_single_split(const StarGraph& g, const BoundaryConditions& bc, const Cut& cut, Complex lambda,
                                  const PoleOptions& opt = {}) {
  const auto sr = split_graph(g, bc, {SplitMode::SingleCut, {cut}});
  using CC = CutCondition;
  const auto& p1 = sr.get(Region::Omega1, {CC::D});
  const auto& p2 = sr.get(Region::Omega2, {CC::D});
  const auto m1 = map_M1(p1, lambda, opt);
  const auto m2 = map_M2(p2, cut.edge, lambda, opt);
  const Complex e = evans(g, bc, lambda);
  const Complex rhs = m1.denominator_evans * m2.denominator_evans * two_sided_sum(m1, m2);
  return std::abs(e - rhs) / (1.0 + std::abs(e));
}

inline double verify_double_split(const StarGraph& g, const BoundaryConditions& bc, const SplitSpec& spec,
                                  Complex lambda, const PoleOptions& opt = {}) {
  const auto sr = split_graph(g, bc, spec);
  using CC = CutCondition;
  const Complex e = evans(g, bc, lambda);
  const Complex e1 = evans(sr.get(Region::Omega1, {CC::D}).graph, sr.get(Region::Omega1, {CC::D}).bc, lambda);
  Complex e1t, e2t, d;
  if (spec.mode == SplitMode::DoubleSameWire) {
    const auto& a = sr.get(Region::Omega1Tilde, {CC::D, CC::D});
    const auto& b = sr.get(Region::Omega2Tilde, {CC::D});
    e1t = evans(a.graph, a.bc, lambda);
    e2t = evans(b.graph, b.bc, lambda);
    d = two_sided_2x2_same_wire(sr, lambda, opt).det_sum();
  } else if (spec.mode == SplitMode::DoubleTwoWires) {
    const auto& a = sr.get(Region::Omega1Tilde, {CC::D});
    const auto& b = sr.get(Region::Omega2Tilde, {CC::D, CC::D});
    e1t = evans(a.graph, a.bc, lambda);
    e2t = evans(b.graph, b.bc, lambda);
    d = two_sided_2x2_two_wires(sr, lambda, opt).det_sum();
  } else {
    throw Error(ErrorCode::InvalidSplit, "double split expected");
  }
  return std::abs(e - e1 * e1t * e2t * d) / (1.0 + std::abs(e));
}

// E^{DD} E^{NN} - E^{ND} E^{DN} against the product of complementary minors of the residual-star
// frame: with z_{j1}, z_{j2} removed, B1 keeps the rows of every wire except j2 and B2 every wire
// except j1 (value and derivative rows of a wire kept adjacent).
struct MinorIdentity {
  Complex lhs, b1b2;
  double residual;
};

inline MinorIdentity minor_identity_check(const SplitResult& sr, Complex lambda) {
  if (sr.spec.mode != SplitMode::DoubleTwoWires) throw Error(ErrorCode::InvalidSplit, "needs a two-wire split");
  using CC = CutCondition;
  const std::size_t j1 = sr.spec.cuts[0].edge, j2 = sr.spec.cuts[1].edge;
  auto ev = [&](CC a, CC b) {
    const auto& p = sr.get(Region::Omega2Tilde, {a, b});
    return evans(p.graph, p.bc, lambda);
  };
  const Complex edd = ev(CC::D, CC::D), enn = ev(CC::N, CC::N), end = ev(CC::N, CC::D), edn = ev(CC::D, CC::N);

  const auto& p = sr.get(Region::Omega2Tilde, {CC::D, CC::D});
  const auto F = fundamental_frame(p.graph, p.bc, lambda).F();
  const auto n = static_cast<Eigen::Index>(p.graph.size());
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < 2 * n; ++c)
    if (c != n + static_cast<Eigen::Index>(j1) && c != n + static_cast<Eigen::Index>(j2)) cols.push_back(c);
  auto minor_without = [&](std::size_t drop) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (static_cast<std::size_t>(w) == drop) continue;
      rows.push_back(w);
      rows.push_back(n + w);
    }
    // wire j1 (or j2) first, then the remaining wires in order
    const std::size_t lead = drop == j2 ? j1 : j2;
    std::vector<Eigen::Index> ordered{static_cast<Eigen::Index>(lead), n + static_cast<Eigen::Index>(lead)};
    for (std::size_t k = 0; k < rows.size(); k += 2)
      if (rows[k] != static_cast<Eigen::Index>(lead)) {
        ordered.push_back(rows[k]);
        ordered.push_back(rows[k + 1]);
      }
    CMatrix m(static_cast<Eigen::Index>(ordered.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < ordered.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = F(ordered[r], cols[c]);
    return det(m);
  };
  const Complex b1 = minor_without(j2), b2 = minor_without(j1);
  const Complex lhs = edd * enn - end * edn;
  const double scale = 1.0 + std::abs(edd * enn) + std::abs(end * edn);
  return {lhs, b1 * b2, std::abs(lhs - b1 * b2) / scale};
}

}  // namespace qgraph

#endif  // QGRAPH_MAPS_HPP
