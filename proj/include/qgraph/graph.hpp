#ifndef QGRAPH_GRAPH_HPP
#define QGRAPH_GRAPH_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "potential.hpp"

namespace qgraph {

struct EdgeSpec {
  double length = 1.0;
  PotentialProfile potential = PotentialProfile::zero(1.0);

  EdgeSpec() = default;
  EdgeSpec(double len, PotentialProfile p) : length(checked_length(len)), potential(std::move(p)) {
    if (std::abs(potential.length() - length) > 1e-14 * length)
      throw Error(ErrorCode::InvalidPotential, "potential domain does not match edge length");
  }
  explicit EdgeSpec(double len) : EdgeSpec(len, PotentialProfile::zero(checked_length(len))) {}

  static double checked_length(double len) {
    if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::InvalidGraph, "edge length must be positive");
    return len;
  }
};

struct StarGraph {
  std::vector<EdgeSpec> edges;

  StarGraph() = default;
  explicit StarGraph(std::vector<EdgeSpec> e) : edges(std::move(e)) {
    if (edges.empty()) throw Error(ErrorCode::InvalidGraph, "star graph needs at least one edge");
  }
  std::size_t size() const { return edges.size(); }
  double total_length() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.length;
    return s;
  }
};

/** \brief Separated vertex conditions: alpha rows act at the origin, diagonal beta at the outer ends. */
struct BoundaryConditions {
  CMatrix alpha1, alpha2;
  CVector beta1, beta2;

  std::size_t size() const { return static_cast<std::size_t>(beta1.size()); }
  CMatrix beta1_matrix() const { return beta1.asDiagonal(); }
  CMatrix beta2_matrix() const { return beta2.asDiagonal(); }
};

struct BoundaryData {
  CVector values_at_ell, derivs_at_ell, values_at_0, derivs_at_0;

  static BoundaryData zeros(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    return {CVector::Zero(m), CVector::Zero(m), CVector::Zero(m), CVector::Zero(m)};
  }
  std::size_t size() const { return static_cast<std::size_t>(values_at_ell.size()); }
};

struct ValidityIssue {
  ErrorCode code;
  std::string message;
};

struct ValidityReport {
  std::vector<ValidityIssue> issues;
  bool valid() const { return issues.empty(); }
  bool has(ErrorCode c) const {
    for (const auto& i : issues)
      if (i.code == c) return true;
    return false;
  }
};

inline ValidityReport validate_bc(const BoundaryConditions& bc) {
  ValidityReport rep;
  const Eigen::Index n = bc.beta1.size();
  if (n == 0 || bc.beta2.size() != n || bc.alpha1.rows() != n || bc.alpha1.cols() != n || bc.alpha2.rows() != n ||
      bc.alpha2.cols() != n) {
    rep.issues.push_back({ErrorCode::DimensionMismatch, "alpha blocks must be n x n and beta diagonals length n"});
    return rep;
  }
  CMatrix a(n, 2 * n);
  a << bc.alpha1, bc.alpha2;
  if (singular_ratio(a) <= 1e-10) rep.issues.push_back({ErrorCode::RankDeficient, "rank[alpha1 alpha2] < n"});
  CMatrix b(n, 2 * n);
  b << bc.beta1_matrix(), bc.beta2_matrix();
  if (singular_ratio(b) <= 1e-10) rep.issues.push_back({ErrorCode::RankDeficient, "rank[beta1 beta2] < n"});

  const double amax = std::max(max_abs(bc.alpha1), max_abs(bc.alpha2));
  const CMatrix comm = bc.alpha1 * bc.alpha2.adjoint() - bc.alpha2 * bc.alpha1.adjoint();
  if (max_abs(comm) > 1e-10 * (1.0 + amax * amax))
    rep.issues.push_back({ErrorCode::NotSelfAdjoint, "alpha1 alpha2^* != alpha2 alpha1^*"});
  const double bmax = std::max(bc.beta1.cwiseAbs().maxCoeff(), bc.beta2.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex g = bc.beta1(i), h = bc.beta2(i);
    if (std::abs(g * std::conj(h) - h * std::conj(g)) > 1e-10 * (1.0 + bmax * bmax))
      rep.issues.push_back({ErrorCode::NotSelfAdjoint, "outer condition " + std::to_string(i) + " is not self-adjoint"});
    if (g == 0.0 && h == 0.0)
      rep.issues.push_back({ErrorCode::DegenerateDiagonalPair, "(g,h) = (0,0) at outer vertex " + std::to_string(i)});
  }
  return rep;
}

inline void require_valid(const BoundaryConditions& bc) {
  const auto rep = validate_bc(bc);
  if (!rep.valid()) throw Error(rep.issues.front().code, rep.issues.front().message);
}

inline void require_compatible(const StarGraph& g, const BoundaryConditions& bc) {
  if (g.size() != bc.size()) throw Error(ErrorCode::DimensionMismatch, "graph and boundary conditions differ in n");
}

inline CVector gamma_trace(const BoundaryConditions& bc, const BoundaryData& bd) {
  const Eigen::Index n = bc.beta1.size();
  if (static_cast<Eigen::Index>(bd.size()) != n || bd.derivs_at_ell.size() != n || bd.values_at_0.size() != n ||
      bd.derivs_at_0.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "boundary data size differs from boundary conditions");
  CVector t(2 * n);
  t.head(n) = bc.beta1.cwiseProduct(bd.values_at_ell) + bc.beta2.cwiseProduct(bd.derivs_at_ell);
  t.tail(n) = bc.alpha1 * bd.values_at_0 + bc.alpha2 * bd.derivs_at_0;
  return t;
}

inline CVector dirichlet_trace(const BoundaryData& bd) {
  const Eigen::Index n = bd.values_at_ell.size();
  CVector t(2 * n);
  t << bd.values_at_ell, bd.values_at_0;
  return t;
}

// Outward normal derivative: +u' at the outer ends, -u' at the origin.
inline CVector neumann_trace(const BoundaryData& bd) {
  const Eigen::Index n = bd.derivs_at_ell.size();
  if (bd.derivs_at_0.size() != n) throw Error(ErrorCode::DimensionMismatch, "boundary data size");
  CVector t(2 * n);
  t << bd.derivs_at_ell, -bd.derivs_at_0;
  return t;
}

// ---------------------------------------------------------------------------
// Presets

enum class VertexKind { Dirichlet, Neumann, Kirchhoff, Robin };

struct VertexCondition {
  VertexKind kind = VertexKind::Dirichlet;
  std::vector<double> theta;  // Robin parameters, one per edge (or a single shared value)

  static VertexCondition dirichlet() { return {VertexKind::Dirichlet, {}}; }
  static VertexCondition neumann() { return {VertexKind::Neumann, {}}; }
  static VertexCondition kirchhoff() { return {VertexKind::Kirchhoff, {}}; }
  static VertexCondition robin(std::vector<double> t) { return {VertexKind::Robin, std::move(t)}; }

  double theta_at(std::size_t i) const {
    if (theta.empty()) return 0.0;
    return theta.size() == 1 ? theta[0] : theta.at(i);
  }
};

// Origin block (alpha1, alpha2). Kirchhoff uses continuity rows u_i - u_{i+1} and a final flux row.
inline void origin_block(const VertexCondition& vc, std::size_t n, CMatrix& a1, CMatrix& a2) {
  const auto m = static_cast<Eigen::Index>(n);
  a1 = CMatrix::Zero(m, m);
  a2 = CMatrix::Zero(m, m);
  switch (vc.kind) {
    case VertexKind::Dirichlet: a1.setIdentity(); break;
    case VertexKind::Neumann: a2.setIdentity(); break;
    case VertexKind::Kirchhoff:
      for (Eigen::Index i = 0; i + 1 < m; ++i) {
        a1(i, i) = 1.0;
        a1(i, i + 1) = -1.0;
      }
      a2.row(m - 1).setOnes();
      break;
    case VertexKind::Robin:
      for (Eigen::Index i = 0; i < m; ++i) {
        a1(i, i) = vc.theta_at(static_cast<std::size_t>(i));
        a2(i, i) = 1.0;
      }
      break;
  }
}

inline void outer_block(const VertexCondition& vc, std::size_t n, CVector& b1, CVector& b2) {
  const auto m = static_cast<Eigen::Index>(n);
  b1 = CVector::Zero(m);
  b2 = CVector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    switch (vc.kind) {
      case VertexKind::Dirichlet: b1(i) = 1.0; break;
      case VertexKind::Neumann:
      case VertexKind::Kirchhoff: b2(i) = 1.0; break;  // a degree-one Kirchhoff vertex is Neumann
      case VertexKind::Robin:
        b1(i) = vc.theta_at(static_cast<std::size_t>(i));
        b2(i) = 1.0;
        break;
    }
  }
}

inline BoundaryConditions compose_bc(const VertexCondition& origin, const VertexCondition& ends, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "n must be at least 1");
  BoundaryConditions bc;
  origin_block(origin, n, bc.alpha1, bc.alpha2);
  outer_block(ends, n, bc.beta1, bc.beta2);
  return bc;
}

// Kirchhoff pairs the Kirchhoff origin with Dirichlet outer ends, as in the two-wire example.
inline BoundaryConditions build_preset(VertexKind kind, std::size_t n, std::vector<double> theta = {}) {
  switch (kind) {
    case VertexKind::Dirichlet: return compose_bc(VertexCondition::dirichlet(), VertexCondition::dirichlet(), n);
    case VertexKind::Neumann: return compose_bc(VertexCondition::neumann(), VertexCondition::neumann(), n);
    case VertexKind::Kirchhoff: return compose_bc(VertexCondition::kirchhoff(), VertexCondition::dirichlet(), n);
    case VertexKind::Robin: {
      auto r = VertexCondition::robin(std::move(theta));
      return compose_bc(r, r, n);
    }
  }
  throw Error(ErrorCode::InvalidScenario, "unknown preset");
}

// ---------------------------------------------------------------------------
// Splitting

enum class SplitMode { SingleCut, DoubleSameWire, DoubleTwoWires };

struct Cut {
  std::size_t edge = 0;
  double position = 0.5;
};

struct SplitSpec {
  SplitMode mode = SplitMode::SingleCut;
  std::vector<Cut> cuts;  // cuts[0] is s1, cuts[1] is s2
};

enum class CutCondition { D, N };

/** \brief Which piece of a split: Omega1 (beyond s1), Omega2 (star after the first cut),
 * the inner interval and the residual star of a double split. */
enum class Region { Omega1, Omega2, Omega1Tilde, Omega2Tilde };

struct Subproblem {
  Region region;
  std::vector<CutCondition> conditions;  // one entry per cut touching the piece, ordered s1 then s2
  StarGraph graph;
  BoundaryConditions bc;
};

struct SplitResult {
  SplitSpec spec;
  std::vector<Subproblem> pieces;

  const Subproblem& get(Region r, std::vector<CutCondition> c) const {
    for (const auto& p : pieces)
      if (p.region == r && p.conditions == c) return p;
    throw Error(ErrorCode::InvalidSplit, "requested piece not produced by this split");
  }
};

inline const char* to_string(CutCondition c) { return c == CutCondition::D ? "D" : "N"; }

inline std::string piece_label(Region r, const std::vector<CutCondition>& c) {
  std::string s;
  switch (r) {
    case Region::Omega1: s = "omega1"; break;
    case Region::Omega2: s = "omega2"; break;
    case Region::Omega1Tilde: s = "omega1t"; break;
    case Region::Omega2Tilde: s = "omega2t"; break;
  }
  if (!c.empty()) s += "_";
  for (auto x : c) s += to_string(x);
  return s;
}

inline void cut_coefficients(CutCondition c, Complex& value_coef, Complex& deriv_coef) {
  value_coef = c == CutCondition::D ? 1.0 : 0.0;
  deriv_coef = c == CutCondition::D ? 0.0 : 1.0;
}

inline void validate_split(const StarGraph& g, const SplitSpec& spec) {
  const std::size_t need = spec.mode == SplitMode::SingleCut ? 1 : 2;
  if (spec.cuts.size() != need) throw Error(ErrorCode::InvalidSplit, "wrong number of cuts for split mode");
  for (const auto& c : spec.cuts) {
    if (c.edge >= g.size()) throw Error(ErrorCode::InvalidSplit, "cut edge index out of range");
    const double len = g.edges[c.edge].length;
    if (!(c.position > 0.0 && c.position < len)) throw Error(ErrorCode::CutOnVertex, "cut must lie strictly inside its edge");
  }
  if (spec.mode == SplitMode::DoubleSameWire) {
    if (spec.cuts[0].edge != spec.cuts[1].edge) throw Error(ErrorCode::InvalidSplit, "same-wire split needs one edge");
    if (!(spec.cuts[1].position < spec.cuts[0].position))
      throw Error(ErrorCode::CutsOutOfOrder, "same-wire split needs s2 < s1");
  }
  if (spec.mode == SplitMode::DoubleTwoWires && spec.cuts[0].edge == spec.cuts[1].edge)
    throw Error(ErrorCode::InvalidSplit, "two-wire split needs distinct edges");
}

namespace detail {

// Interval [a, b] of edge j as a 1-edge star: origin at a (condition `at_a`), far end at b with `far`.
inline Subproblem interval_piece(const StarGraph& g, std::size_t j, double a, double b, CutCondition at_a,
                                 const Complex& far_g, const Complex& far_h, Region r,
                                 std::vector<CutCondition> conds) {
  const auto& e = g.edges[j];
  const double len = b - a;
  Subproblem p{r, std::move(conds), StarGraph({EdgeSpec(len, e.potential.restrict(a, b))}), {}};
  Complex v, d;
  cut_coefficients(at_a, v, d);
  p.bc.alpha1 = CMatrix::Constant(1, 1, v);
  p.bc.alpha2 = CMatrix::Constant(1, 1, d);
  p.bc.beta1 = CVector::Constant(1, far_g);
  p.bc.beta2 = CVector::Constant(1, far_h);
  return p;
}

// Star with selected edges truncated; each truncated edge gets a cut condition at its new end.
inline Subproblem truncated_star(const StarGraph& g, const BoundaryConditions& bc,
                                 const std::vector<std::pair<Cut, CutCondition>>& ends, Region r,
                                 std::vector<CutCondition> conds) {
  std::vector<EdgeSpec> edges = g.edges;
  BoundaryConditions nb = bc;
  for (const auto& [cut, cond] : ends) {
    const auto& e = g.edges[cut.edge];
    edges[cut.edge] = EdgeSpec(cut.position, e.potential.restrict(0.0, cut.position));
    Complex v, d;
    cut_coefficients(cond, v, d);
    nb.beta1(static_cast<Eigen::Index>(cut.edge)) = v;
    nb.beta2(static_cast<Eigen::Index>(cut.edge)) = d;
  }
  return {r, std::move(conds), StarGraph(std::move(edges)), nb};
}

}  // namespace detail

inline SplitResult split_graph(const StarGraph& g, const BoundaryConditions& bc, const SplitSpec& spec) {
  require_compatible(g, bc);
  validate_split(g, spec);
  using CC = CutCondition;
  SplitResult out{spec, {}};
  const Cut c1 = spec.cuts[0];
  const auto j1 = static_cast<Eigen::Index>(c1.edge);
  const double l1 = g.edges[c1.edge].length;

  for (CC a : {CC::D, CC::N}) {
    out.pieces.push_back(detail::interval_piece(g, c1.edge, c1.position, l1, a, bc.beta1(j1), bc.beta2(j1),
                                                Region::Omega1, {a}));
    out.pieces.push_back(detail::truncated_star(g, bc, {{c1, a}}, Region::Omega2, {a}));
  }
  if (spec.mode == SplitMode::SingleCut) return out;

  const Cut c2 = spec.cuts[1];
  if (spec.mode == SplitMode::DoubleSameWire) {
    // Inner interval [s2, s1]: origin at s2, far end at s1. Letters read s1 then s2.
    for (CC at1 : {CC::D, CC::N})
      for (CC at2 : {CC::D, CC::N}) {
        Complex v1, d1;
        cut_coefficients(at1, v1, d1);
        out.pieces.push_back(detail::interval_piece(g, c1.edge, c2.position, c1.position, at2, v1, d1,
                                                    Region::Omega1Tilde, {at1, at2}));
      }
    for (CC a : {CC::D, CC::N}) out.pieces.push_back(detail::truncated_star(g, bc, {{c2, a}}, Region::Omega2Tilde, {a}));
    return out;
  }

  const auto j2 = static_cast<Eigen::Index>(c2.edge);
  const double l2 = g.edges[c2.edge].length;
  for (CC a : {CC::D, CC::N})
    out.pieces.push_back(detail::interval_piece(g, c2.edge, c2.position, l2, a, bc.beta1(j2), bc.beta2(j2),
                                                Region::Omega1Tilde, {a}));
  for (CC at1 : {CC::D, CC::N})
    for (CC at2 : {CC::D, CC::N})
      out.pieces.push_back(detail::truncated_star(g, bc, {{c1, at1}, {c2, at2}}, Region::Omega2Tilde, {at1, at2}));
  return out;
}

}  // namespace qgraph

#endif  // QGRAPH_GRAPH_HPP
