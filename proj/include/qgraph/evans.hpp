#ifndef QGRAPH_EVANS_HPP
#define QGRAPH_EVANS_HPP

#include <vector>

#include "propagator.hpp"

namespace qgraph {

/** \brief Y (origin-side) and Z (outer-side) solution columns with derivatives at a point x of each edge. */
struct FundamentalFrame {
  CMatrix Y, Z, Yp, Zp;
  Complex lambda;
  std::vector<double> eval_point;

  std::size_t size() const { return static_cast<std::size_t>(Y.rows()); }

  CMatrix F() const {
    const Eigen::Index n = Y.rows();
    CMatrix f(2 * n, 2 * n);
    f << Y, Z, Yp, Zp;
    return f;
  }
};

// Initial data of the Y columns at the origin: [y; y'] = [-alpha2^*; alpha1^*].
inline void origin_initial_data(const BoundaryConditions& bc, CMatrix& y0, CMatrix& yp0) {
  y0 = -bc.alpha2.adjoint();
  yp0 = bc.alpha1.adjoint();
}

// Initial data of z_{i,i} at the outer end: (z, z') = (-conj(h_i), conj(g_i)).
inline Vec2 outer_initial_data(const BoundaryConditions& bc, std::size_t i) {
  const auto k = static_cast<Eigen::Index>(i);
  return Vec2(-std::conj(bc.beta2(k)), std::conj(bc.beta1(k)));
}

inline FundamentalFrame fundamental_frame(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                          const std::vector<double>& x, PropagationMethod m = PropagationMethod::Auto) {
  require_compatible(g, bc);
  const std::size_t n = g.size();
  if (x.size() != n) throw Error(ErrorCode::DimensionMismatch, "evaluation point needs one coordinate per edge");
  const auto N = static_cast<Eigen::Index>(n);
  FundamentalFrame fr{CMatrix::Zero(N, N), CMatrix::Zero(N, N), CMatrix::Zero(N, N), CMatrix::Zero(N, N), lambda, x};
  CMatrix y0, yp0;
  origin_initial_data(bc, y0, yp0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto J = static_cast<Eigen::Index>(j);
    const auto& e = g.edges[j];
    const Mat2 t0 = transfer(e, lambda, 0.0, x[j], m);
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec2 s = t0 * Vec2(y0(J, i), yp0(J, i));
      fr.Y(J, i) = s(0);
      fr.Yp(J, i) = s(1);
    }
    const Vec2 z = transfer(e, lambda, e.length, x[j], m) * outer_initial_data(bc, j);
    fr.Z(J, J) = z(0);
    fr.Zp(J, J) = z(1);
  }
  return fr;
}

inline std::vector<double> origin_point(const StarGraph& g) { return std::vector<double>(g.size(), 0.0); }

inline std::vector<double> outer_point(const StarGraph& g) {
  std::vector<double> x;
  for (const auto& e : g.edges) x.push_back(e.length);
  return x;
}

inline FundamentalFrame fundamental_frame(const StarGraph& g, const BoundaryConditions& bc, Complex lambda) {
  return fundamental_frame(g, bc, lambda, origin_point(g));
}

inline Complex evans(const StarGraph& g, const BoundaryConditions& bc, Complex lambda, const std::vector<double>& x,
                     PropagationMethod m = PropagationMethod::Auto) {
  return det(fundamental_frame(g, bc, lambda, x, m).F());
}

inline Complex evans(const StarGraph& g, const BoundaryConditions& bc, Complex lambda) {
  return evans(g, bc, lambda, origin_point(g));
}

inline CMatrix c_matrix(const FundamentalFrame& fr, const BoundaryConditions& bc) {
  for (double x : fr.eval_point)
    if (x != 0.0) throw Error(ErrorCode::MismatchedEvaluationPoint, "C(lambda) needs the frame at the origin");
  return bc.alpha1 * fr.Z + bc.alpha2 * fr.Zp;
}

inline double x_independence_check(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                   const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two trial points");
  const Complex e0 = evans(g, bc, lambda, points.front());
  double dev = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k)
    dev = std::max(dev, std::abs(evans(g, bc, lambda, points[k]) - e0) / (1.0 + std::abs(e0)));
  return dev;
}

// ---------------------------------------------------------------------------
// Boundary-value problems (H - lambda)u = 0 with prescribed Gamma-trace, by expansion in the frame.

/** \brief u = sum_i c_i y_i + sum_i c_{n+i} z_i with coefficient vector c. */
struct FrameSolution {
  StarGraph graph;
  BoundaryConditions bc;
  Complex lambda;
  CVector coeffs;
  FundamentalFrame at0, atL;

  std::size_t size() const { return graph.size(); }

  // (u_j, u_j') at x on edge j.
  Vec2 state(std::size_t j, double x) const {
    const auto J = static_cast<Eigen::Index>(j);
    const auto N = static_cast<Eigen::Index>(size());
    Complex u0 = 0.0, up0 = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      u0 += coeffs(i) * at0.Y(J, i);
      up0 += coeffs(i) * at0.Yp(J, i);
    }
    const auto& e = graph.edges[j];
    Vec2 s = transfer(e, lambda, 0.0, x) * Vec2(u0, up0);
    s += coeffs(N + J) * (transfer(e, lambda, e.length, x) * outer_initial_data(bc, j));
    return s;
  }

  BoundaryData boundary_data() const {
    const auto N = static_cast<Eigen::Index>(size());
    const CVector cy = coeffs.head(N), cz = coeffs.tail(N);
    return {atL.Y * cy + atL.Z * cz, atL.Yp * cy + atL.Zp * cz, at0.Y * cy + at0.Z * cz, at0.Yp * cy + at0.Zp * cz};
  }
};

// Gamma-trace of each frame column, as a 2n x 2n matrix.
inline CMatrix trace_matrix(const BoundaryConditions& bc, const FundamentalFrame& at0, const FundamentalFrame& atL) {
  const Eigen::Index n = at0.Y.rows();
  CMatrix s(2 * n, 2 * n);
  const CMatrix b1 = bc.beta1_matrix(), b2 = bc.beta2_matrix();
  s.topLeftCorner(n, n) = b1 * atL.Y + b2 * atL.Yp;
  s.topRightCorner(n, n) = b1 * atL.Z + b2 * atL.Zp;
  s.bottomLeftCorner(n, n) = bc.alpha1 * at0.Y + bc.alpha2 * at0.Yp;
  s.bottomRightCorner(n, n) = bc.alpha1 * at0.Z + bc.alpha2 * at0.Zp;
  return s;
}

// |det F| over the product of its column norms; small near the spectrum.
inline double evans_ratio(const FundamentalFrame& fr) {
  const CMatrix f = fr.F();
  return std::abs(det(f)) / std::max(1e-300, f.colwise().norm().prod());
}

inline FrameSolution solve_trace_bvp(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                     const CVector& f, double singular_tol = 1e-11) {
  require_compatible(g, bc);
  if (f.size() != static_cast<Eigen::Index>(2 * g.size()))
    throw Error(ErrorCode::DimensionMismatch, "trace vector must have length 2n");
  FrameSolution sol{g, bc, lambda, {}, fundamental_frame(g, bc, lambda, origin_point(g)),
                    fundamental_frame(g, bc, lambda, outer_point(g))};
  const CMatrix s = trace_matrix(bc, sol.at0, sol.atL);
  if (!(evans_ratio(sol.at0) > singular_tol)) throw Error(ErrorCode::OnSpectrum, "boundary-value problem is singular at this lambda");
  sol.coeffs = Eigen::PartialPivLU<CMatrix>(s).solve(f);
  return sol;
}

}  // namespace qgraph

#endif  // QGRAPH_EVANS_HPP
