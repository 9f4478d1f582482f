#ifndef QGRAPH_RESOLVENT_HPP
#define QGRAPH_RESOLVENT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "evans.hpp"

namespace qgraph {

// Right-hand side v of (H - lambda)u = v, as a function of (edge, position).
using Forcing = std::function<Complex(std::size_t, double)>;

inline constexpr std::size_t kGridPoints = 513;
inline constexpr std::size_t kGaussNodes = 32;

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline GaussRule gauss_legendre_rule(std::size_t n) {
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

inline const GaussRule& gauss_legendre() {
  static const GaussRule rule = gauss_legendre_rule(kGaussNodes);
  return rule;
}

struct QuadNodes {
  std::vector<double> x, w;
};

// Composite Gauss-Legendre on [a, b], one panel between each pair of consecutive cuts.
inline QuadNodes composite_rule(const std::vector<double>& cuts) {
  const auto& g = gauss_legendre();
  QuadNodes q;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      q.x.push_back(mid + half * g.x[i]);
      q.w.push_back(half * g.w[i]);
    }
  }
  return q;
}

// Sorted union of [a, b] endpoints, interior potential breakpoints and the extra points.
inline std::vector<double> panel_cuts(const EdgeSpec& e, double a, double b, const std::vector<double>& extra = {}) {
  std::vector<double> c{a, b};
  for (double x : e.potential.breakpoints())
    if (x > a && x < b) c.push_back(x);
  for (double x : extra)
    if (x > a && x < b) c.push_back(x);
  std::sort(c.begin(), c.end());
  const double tol = 1e-13 * std::max(1.0, e.length);
  std::vector<double> out;
  for (double x : c)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  if (out.back() != b) out.back() = b;
  return out;
}

inline std::vector<double> edge_grid(double length, std::size_t points = kGridPoints) {
  std::vector<double> x(points);
  for (std::size_t k = 0; k < points; ++k)
    x[k] = k + 1 == points ? length : length * static_cast<double>(k) / static_cast<double>(points - 1);
  return x;
}

/** \brief Per-edge samples on a uniform grid, linearly interpolated between nodes. */
struct SampledFunction {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<Complex>> values;

  std::size_t size() const { return x.size(); }

  Complex operator()(std::size_t j, double t) const {
    const auto& xs = x.at(j);
    const auto& vs = values.at(j);
    if (t <= xs.front()) return vs.front();
    if (t >= xs.back()) return vs.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), t);
    const auto k = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double s = (t - xs[k]) / (xs[k + 1] - xs[k]);
    return (1.0 - s) * vs[k] + s * vs[k + 1];
  }

  Forcing as_forcing() const {
    return [self = *this](std::size_t j, double t) { return self(j, t); };
  }
};

inline SampledFunction sample(const StarGraph& g, const Forcing& f, std::size_t points = kGridPoints) {
  SampledFunction s;
  for (std::size_t j = 0; j < g.size(); ++j) {
    s.x.push_back(edge_grid(g.edges[j].length, points));
    std::vector<Complex> v;
    for (double t : s.x.back()) v.push_back(f(j, t));
    s.values.push_back(std::move(v));
  }
  return s;
}

// Indicator of edge j: v_j = 1, all other components 0.
inline Forcing edge_indicator(std::size_t j) {
  return [j](std::size_t k, double) { return k == j ? Complex(1.0) : Complex(0.0); };
}

// ---------------------------------------------------------------------------
// Partner selection

/** \brief For each edge j the index tau_j of a y column independent of z_{j,j}, with D_j = W(y, z). */
struct TauSelection {
  Complex lambda;
  std::vector<std::size_t> tau;
  std::vector<Complex> D;
  std::vector<Vec2> y_start;  // (y, y') of y_{tau_j, j} at the origin
  std::vector<Vec2> z_end;    // (z, z') of z_{j,j} at l_j

  std::size_t size() const { return tau.size(); }
};

inline void require_off_spectrum(const FundamentalFrame& fr, double tol = 1e-11) {
  if (!(evans_ratio(fr) > tol)) throw Error(ErrorCode::OnSpectrum, "lambda is (numerically) an eigenvalue");
}

inline TauSelection select_tau(const FundamentalFrame& fr, const BoundaryConditions& bc) {
  for (double x : fr.eval_point)
    if (x != 0.0) throw Error(ErrorCode::MismatchedEvaluationPoint, "partner selection needs the frame at the origin");
  const auto n = static_cast<Eigen::Index>(fr.size());
  if (!(evans_ratio(fr) > 1e-11))
    throw Error(ErrorCode::NoIndependentPartner, "frame is degenerate: lambda is on the spectrum");
  TauSelection ts;
  ts.lambda = fr.lambda;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex z = fr.Z(j, j), zp = fr.Zp(j, j);
    Eigen::Index best = 0;
    double best_abs = -1.0, best_rel = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex w = fr.Y(j, i) * zp - fr.Yp(j, i) * z;
      const double scale = std::hypot(std::abs(fr.Y(j, i)), std::abs(fr.Yp(j, i))) * std::hypot(std::abs(z), std::abs(zp));
      if (std::abs(w) > best_abs) {
        best_abs = std::abs(w);
        best = i;
        best_rel = scale > 0.0 ? best_abs / scale : 0.0;
      }
    }
    if (!(best_rel > 1e-12))
      throw Error(ErrorCode::NoIndependentPartner, "no y column independent of z on edge " + std::to_string(j));
    ts.tau.push_back(static_cast<std::size_t>(best));
    ts.D.push_back(fr.Y(j, best) * zp - fr.Yp(j, best) * z);
    ts.y_start.emplace_back(fr.Y(j, best), fr.Yp(j, best));
    ts.z_end.push_back(outer_initial_data(bc, static_cast<std::size_t>(j)));
  }
  return ts;
}

namespace detail {

// (y, y') of the selected partner and (z, z') at each point, for edge j.
inline void partner_states(const EdgeSpec& e, const TauSelection& ts, std::size_t j, const std::vector<double>& pts,
                           std::vector<Vec2>& y, std::vector<Vec2>& z) {
  const auto ty = transfer_sweep(e, ts.lambda, 0.0, pts);
  const auto tz = transfer_sweep(e, ts.lambda, e.length, pts);
  y.resize(pts.size());
  z.resize(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    y[k] = ty[k] * ts.y_start[j];
    z[k] = tz[k] * ts.z_end[j];
  }
}

inline void check_finite(Complex c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
    throw Error(ErrorCode::QuadratureFailure, "non-finite quadrature sum");
}

}  // namespace detail

// y_p at x on edge j: -(1/D_j)[y(x) int_x^l v z + z(x) int_0^x v y].
inline Complex particular_solution(const StarGraph& g, const TauSelection& ts, const Forcing& v, std::size_t j,
                                   double x) {
  if (j >= g.size() || ts.size() != g.size()) throw Error(ErrorCode::DimensionMismatch, "edge index or selection size");
  const auto& e = g.edges[j];
  x = detail::clamp_to_edge(e, x);
  const auto grid = edge_grid(e.length);
  const auto left = composite_rule(panel_cuts(e, 0.0, x, grid));
  const auto right = composite_rule(panel_cuts(e, x, e.length, grid));
  std::vector<double> pts = left.x;
  pts.insert(pts.end(), right.x.begin(), right.x.end());
  pts.push_back(x);
  std::vector<Vec2> y, z;
  detail::partner_states(e, ts, j, pts, y, z);
  Complex i1 = 0.0, i2 = 0.0;
  const std::size_t nl = left.x.size();
  for (std::size_t k = 0; k < nl; ++k) i1 += left.w[k] * v(j, left.x[k]) * y[k](0);
  for (std::size_t k = 0; k < right.x.size(); ++k) i2 += right.w[k] * v(j, right.x[k]) * z[nl + k](0);
  detail::check_finite(i1);
  detail::check_finite(i2);
  const Vec2& yx = y.back();
  const Vec2& zx = z.back();
  return -(yx(0) * i2 + zx(0) * i1) / ts.D[j];
}

// ---------------------------------------------------------------------------
// Resolvent

/** \brief Grid data of one edge: partner solutions and the two cumulative integrals. */
struct EdgeResolvent {
  std::vector<double> x;
  std::vector<Vec2> y, z;
  std::vector<Complex> I1;  // int_0^x v y
  std::vector<Complex> I2;  // int_x^l v z
};

/** \brief u = R_lambda v = sum_i c_{n+i} z_i + y_p, sampled per edge with dense evaluation. */
struct ResolventApplication {
  StarGraph graph;
  BoundaryConditions bc;
  Complex lambda;
  Forcing forcing;
  SampledFunction input;
  TauSelection tau;
  CVector coeffs;  // length 2n, first n are zero
  CVector coeffs_lu, coeffs_cramer;
  double solver_discrepancy = 0.0;
  SampledFunction particular, output, output_deriv;
  std::vector<EdgeResolvent> edges;

  std::size_t size() const { return graph.size(); }

  Complex c_tail(std::size_t j) const { return coeffs(static_cast<Eigen::Index>(size() + j)); }

  // (u, u') at a grid node.
  Vec2 node_state(std::size_t j, std::size_t k) const {
    const auto& d = edges[j];
    const Complex D = tau.D[j];
    const Vec2& y = d.y[k];
    const Vec2& z = d.z[k];
    const Complex c = c_tail(j);
    return Vec2(c * z(0) - (y(0) * d.I2[k] + z(0) * d.I1[k]) / D, c * z(1) - (y(1) * d.I2[k] + z(1) * d.I1[k]) / D);
  }

  // u'' at a grid node from the ODEs of y and z on the segment containing it.
  Complex node_second_derivative(std::size_t j, std::size_t k) const {
    const auto& d = edges[j];
    const double V = graph.edges[j].potential(d.x[k]);
    const Complex D = tau.D[j];
    const Vec2& y = d.y[k];
    const Vec2& z = d.z[k];
    const Complex q = V - lambda;
    const Complex vx = forcing(j, d.x[k]);
    const Complex ypp = q * y(0), zpp = q * z(0);
    const Complex part = -(ypp * d.I2[k] - y(1) * vx * z(0) + zpp * d.I1[k] + z(1) * vx * y(0)) / D;
    return c_tail(j) * zpp + part;
  }

  // (u, u') anywhere on edge j.
  Vec2 eval(std::size_t j, double x) const {
    const auto& d = edges.at(j);
    const auto& e = graph.edges[j];
    x = detail::clamp_to_edge(e, x);
    auto it = std::upper_bound(d.x.begin(), d.x.end(), x);
    std::size_t k = it == d.x.begin() ? 0 : static_cast<std::size_t>(it - d.x.begin()) - 1;
    k = std::min(k, d.x.size() - 1);
    if (x == d.x[k]) return node_state(j, k);
    const auto q = composite_rule(panel_cuts(e, d.x[k], x));
    std::vector<double> pts = q.x;
    pts.push_back(x);
    const auto ts = transfer_sweep(e, lambda, d.x[k], pts);
    Complex i1 = d.I1[k], i2 = d.I2[k];
    for (std::size_t m = 0; m < q.x.size(); ++m) {
      const Complex vm = forcing(j, q.x[m]);
      i1 += q.w[m] * vm * (ts[m] * d.y[k])(0);
      i2 -= q.w[m] * vm * (ts[m] * d.z[k])(0);
    }
    const Vec2 y = ts.back() * d.y[k];
    const Vec2 z = ts.back() * d.z[k];
    const Complex c = c_tail(j), D = tau.D[j];
    return Vec2(c * z(0) - (y(0) * i2 + z(0) * i1) / D, c * z(1) - (y(1) * i2 + z(1) * i1) / D);
  }

  BoundaryData boundary_data() const {
    const auto n = static_cast<Eigen::Index>(size());
    BoundaryData bd = BoundaryData::zeros(size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto J = static_cast<std::size_t>(j);
      const Vec2 a = node_state(J, 0), b = node_state(J, edges[J].x.size() - 1);
      bd.values_at_0(j) = a(0);
      bd.derivs_at_0(j) = a(1);
      bd.values_at_ell(j) = b(0);
      bd.derivs_at_ell(j) = b(1);
    }
    return bd;
  }

  CVector trace() const { return gamma_trace(bc, boundary_data()); }

  // max |-u'' + (V - lambda)u - v| over all grid nodes.
  double segment_residual() const {
    double r = 0.0;
    for (std::size_t j = 0; j < size(); ++j)
      for (std::size_t k = 0; k < edges[j].x.size(); ++k) {
        const double x = edges[j].x[k];
        const Complex u = node_state(j, k)(0);
        const Complex res = -node_second_derivative(j, k) + (graph.edges[j].potential(x) - lambda) * u - forcing(j, x);
        r = std::max(r, std::abs(res));
      }
    return r;
  }
};

inline ResolventApplication resolvent_apply(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                            const Forcing& v, std::size_t grid_points = kGridPoints) {
  require_compatible(g, bc);
  if (grid_points < 2) throw Error(ErrorCode::DimensionMismatch, "grid needs at least two points");
  const FundamentalFrame fr = fundamental_frame(g, bc, lambda);
  require_off_spectrum(fr);
  const std::size_t n = g.size();
  const auto N = static_cast<Eigen::Index>(n);

  ResolventApplication ra;
  ra.graph = g;
  ra.bc = bc;
  ra.lambda = lambda;
  ra.forcing = v;
  ra.tau = select_tau(fr, bc);
  ra.input = sample(g, v, grid_points);

  for (std::size_t j = 0; j < n; ++j) {
    const auto& e = g.edges[j];
    EdgeResolvent d;
    d.x = edge_grid(e.length, grid_points);
    const auto cuts = panel_cuts(e, 0.0, e.length, d.x);
    const auto q = composite_rule(cuts);
    const std::size_t per = gauss_legendre().x.size();
    // points: all cuts followed by all quadrature nodes
    std::vector<double> pts = cuts;
    pts.insert(pts.end(), q.x.begin(), q.x.end());
    std::vector<Vec2> y, z;
    detail::partner_states(e, ra.tau, j, pts, y, z);

    const std::size_t nc = cuts.size();
    std::vector<Complex> c1(nc, 0.0), c2(nc, 0.0);  // cumulative int v y and int v z from 0
    for (std::size_t p = 0; p + 1 < nc; ++p) {
      Complex s1 = 0.0, s2 = 0.0;
      for (std::size_t m = 0; m < per; ++m) {
        const std::size_t idx = p * per + m;
        const Complex vm = v(j, q.x[idx]);
        s1 += q.w[idx] * vm * y[nc + idx](0);
        s2 += q.w[idx] * vm * z[nc + idx](0);
      }
      c1[p + 1] = c1[p] + s1;
      c2[p + 1] = c2[p] + s2;
    }
    detail::check_finite(c1.back());
    detail::check_finite(c2.back());

    std::size_t ci = 0;
    const double tol = 1e-13 * std::max(1.0, e.length);
    for (double x : d.x) {
      while (ci + 1 < nc && cuts[ci] < x - tol) ++ci;
      d.y.push_back(y[ci]);
      d.z.push_back(z[ci]);
      d.I1.push_back(c1[ci]);
      d.I2.push_back(c2.back() - c2[ci]);
    }
    ra.edges.push_back(std::move(d));
  }

  // coefficients of the z columns from the origin conditions
  CVector yp0(N), ypp0(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const auto J = static_cast<std::size_t>(j);
    const Complex i2 = ra.edges[J].I2.front();
    yp0(j) = -ra.tau.y_start[J](0) * i2 / ra.tau.D[J];
    ypp0(j) = -ra.tau.y_start[J](1) * i2 / ra.tau.D[J];
  }
  const CMatrix C = c_matrix(fr, bc);
  const CVector rhs = -(bc.alpha1 * yp0 + bc.alpha2 * ypp0);
  ra.coeffs_lu = lu_solve(C, rhs);
  ra.coeffs_cramer = cramer_solve(C, rhs);
  const double cn = ra.coeffs_lu.cwiseAbs().maxCoeff();
  const double diff = (ra.coeffs_lu - ra.coeffs_cramer).cwiseAbs().maxCoeff();
  ra.solver_discrepancy = cn > 0.0 ? diff / cn : diff;
  ra.coeffs = CVector::Zero(2 * N);
  ra.coeffs.tail(N) = n <= 3 ? ra.coeffs_cramer : ra.coeffs_lu;

  for (std::size_t j = 0; j < n; ++j) {
    const auto& d = ra.edges[j];
    std::vector<Complex> p, u, up;
    for (std::size_t k = 0; k < d.x.size(); ++k) {
      const Vec2 s = ra.node_state(j, k);
      u.push_back(s(0));
      up.push_back(s(1));
      p.push_back(s(0) - ra.c_tail(j) * d.z[k](0));
    }
    ra.particular.x.push_back(d.x);
    ra.particular.values.push_back(std::move(p));
    ra.output.x.push_back(d.x);
    ra.output.values.push_back(std::move(u));
    ra.output_deriv.x.push_back(d.x);
    ra.output_deriv.values.push_back(std::move(up));
  }
  return ra;
}

inline ResolventApplication resolvent_apply(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                            const SampledFunction& v) {
  if (v.size() != g.size()) throw Error(ErrorCode::DimensionMismatch, "forcing needs one sample set per edge");
  return resolvent_apply(g, bc, lambda, v.as_forcing(), v.x.empty() ? kGridPoints : v.x.front().size());
}

// ---------------------------------------------------------------------------
// Boundary projections

// M diag(I, -I): flips the sign of the origin half of the columns.
inline CMatrix tilde(const CMatrix& m) {
  CMatrix t = m;
  const Eigen::Index n = m.cols() / 2;
  t.rightCols(n) *= -1.0;
  return t;
}

inline CMatrix sign_flip(Eigen::Index n) {
  CMatrix j = CMatrix::Identity(2 * n, 2 * n);
  j.bottomRightCorner(n, n) *= -1.0;
  return j;
}

/** \brief Dirichlet, Neumann and Robin parts of the boundary conditions, with Lambda on ran P_R. */
struct ProjectionSet {
  CMatrix delta1, delta2, U;
  CMatrix PD, PN, PR;
  CMatrix basis_R;   // orthonormal columns spanning ran P_R
  CMatrix Lambda_R;  // Lambda in that basis

  Eigen::Index half() const { return delta1.rows() / 2; }
  CMatrix A() const { return delta1 - I_unit * delta2; }  // delta1 - i delta2
  CMatrix Lambda() const { return basis_R * Lambda_R * basis_R.adjoint(); }
  CMatrix PD_tilde() const { return tilde(PD); }
  CMatrix PN_tilde() const { return tilde(PN); }
  CMatrix PR_tilde() const { return tilde(PR); }
  Eigen::Index rank_D() const { return static_cast<Eigen::Index>(std::lround(PD.trace().real())); }
  Eigen::Index rank_N() const { return static_cast<Eigen::Index>(std::lround(PN.trace().real())); }
  Eigen::Index rank_R() const { return basis_R.cols(); }
};

inline ProjectionSet build_projections(const BoundaryConditions& bc) {
  require_valid(bc);
  ProjectionSet ps;
  ps.delta1 = block_diag(bc.beta1_matrix(), bc.alpha1);
  ps.delta2 = block_diag(bc.beta2_matrix(), bc.alpha2);
  const CMatrix a = ps.A();
  if (!(singular_ratio(a) > 1e-12))
    throw Error(ErrorCode::SingularDeltaCombination, "delta1 - i delta2 is singular");
  const Eigen::Index m = a.rows();
  const auto lu = a.partialPivLu();
  ps.U = -lu.solve(ps.delta1 + I_unit * ps.delta2);
  const CMatrix kd = kernel_basis(ps.delta2, 1e-10);
  const CMatrix kn = kernel_basis(ps.delta1, 1e-10);
  ps.PD = kd * kd.adjoint();
  ps.PN = kn * kn.adjoint();
  ps.PR = CMatrix::Identity(m, m) - ps.PD - ps.PN;
  ps.basis_R = projection_range(ps.PR);
  const CMatrix& q = ps.basis_R;
  const CMatrix id = CMatrix::Identity(m, m);
  if (q.cols() > 0) {
    const CMatrix up = q.adjoint() * (ps.U + id) * q;
    if (!(singular_ratio(up) > 1e-12))
      throw Error(ErrorCode::SingularDeltaCombination, "U + I is not invertible on the Robin part");
    // U is unitary on ran P_R, so its Schur form is diagonal and the Cayley transform acts on the eigenvalues:
    // -i (e^{it} - 1) / (e^{it} + 1) = tan(t / 2). Hermitian by construction even when U is close to -1.
    const Eigen::ComplexSchur<CMatrix> schur(q.adjoint() * ps.U * q);
    const CMatrix& z = schur.matrixU();
    Eigen::VectorXd t(z.cols());
    for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = std::tan(0.5 * std::arg(schur.matrixT()(k, k)));
    ps.Lambda_R = z * t.cast<Complex>().asDiagonal() * z.adjoint();
  } else {
    ps.Lambda_R = CMatrix::Zero(0, 0);
  }
  return ps;
}

/** \brief Matrix identities of the projection set; all should be at rounding level. */
struct ProjectionInvariants {
  double unitarity = 0.0;     // |U* U - I|
  double partition = 0.0;     // P_D, P_N, P_R idempotent, Hermitian, mutually orthogonal
  double dirichlet = 0.0;     // |(U + I) P_D|
  double neumann = 0.0;       // |(U - I) P_N|
  double lambda_sym = 0.0;    // |Lambda - Lambda*|
  double robin_invariant = 0.0;  // |P_R U - U P_R|

  double max() const { return std::max({unitarity, partition, dirichlet, neumann, lambda_sym, robin_invariant}); }
};

inline ProjectionInvariants check_projections(const ProjectionSet& ps) {
  const Eigen::Index m = ps.U.rows();
  const CMatrix id = CMatrix::Identity(m, m);
  ProjectionInvariants r;
  r.unitarity = max_abs(ps.U.adjoint() * ps.U - id);
  double p = max_abs(ps.PD + ps.PN + ps.PR - id);
  for (const CMatrix* x : {&ps.PD, &ps.PN, &ps.PR}) {
    p = std::max(p, max_abs(*x * *x - *x));
    p = std::max(p, max_abs(*x - x->adjoint()));
  }
  p = std::max({p, max_abs(ps.PD * ps.PN), max_abs(ps.PD * ps.PR), max_abs(ps.PN * ps.PR)});
  r.partition = p;
  r.dirichlet = max_abs((ps.U + id) * ps.PD);
  r.neumann = max_abs((ps.U - id) * ps.PN);
  r.lambda_sym = max_abs(ps.Lambda_R - ps.Lambda_R.adjoint());
  r.robin_invariant = max_abs(ps.PR * ps.U - ps.U * ps.PR);
  return r;
}

/** \brief Columns i hold L_i, M_i, N_i for the basis vector e_i. */
struct AdjustmentVectors {
  CMatrix L, M, N;
};

inline AdjustmentVectors adjustment_vectors(const ProjectionSet& ps) {
  const Eigen::Index m = ps.U.rows();
  const CMatrix a = ps.A();
  const CMatrix g = a.partialPivLu().solve(CMatrix::Identity(m, m));
  AdjustmentVectors av;
  av.L = -I_unit * ps.PN_tilde() * g;
  av.N = -ps.PD * g;
  av.M = CMatrix::Zero(m, m);
  if (ps.rank_R() > 0) {
    // (delta2)_Q^{-1}: the preimage in ran P_R of A P~_R g under delta2
    const CMatrix target = a * ps.PR_tilde() * g;
    const CMatrix d2q = ps.delta2 * ps.basis_R;
    av.M = ps.basis_R * d2q.colPivHouseholderQr().solve(target);
  }
  return av;
}

// The three trace relations satisfied by any u with Gamma-trace f:
// P_D g_D = P_D A^{-1} f, P_N g_N = -i P~_N A^{-1} f, P_R g_N = Lambda P~_R g_D - 2i (U + I)_R^{-1} P~_R A^{-1} f.
inline double projection_trace_residual(const ProjectionSet& ps, const BoundaryData& bd, const CVector& f) {
  const CVector gd = dirichlet_trace(bd), gn = neumann_trace(bd);
  const CVector g = ps.A().partialPivLu().solve(f);
  double r = (ps.PD * gd - ps.PD * g).cwiseAbs().maxCoeff();
  r = std::max(r, (ps.PN * gn + I_unit * ps.PN_tilde() * g).cwiseAbs().maxCoeff());
  if (ps.rank_R() > 0) {
    const Eigen::Index m = ps.U.rows();
    const CMatrix& q = ps.basis_R;
    const CMatrix up = q.adjoint() * (ps.U + CMatrix::Identity(m, m)) * q;
    const CVector corr = q * up.partialPivLu().solve(q.adjoint() * (ps.PR_tilde() * g));
    const CVector rhs = ps.Lambda() * ps.PR_tilde() * gd - 2.0 * I_unit * corr;
    r = std::max(r, (ps.PR * gn - rhs).cwiseAbs().maxCoeff());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary inner-product identity

// Which w enters the boundary pairing: R_{conj lambda} v (exact for all data) or conj(R_lambda v) as printed,
// which agrees with the former only for real data.
enum class InnerProductForm { Adjoint, Literal };

struct InnerProductCheck {
  Complex direct;    // (u, v) by quadrature
  Complex boundary;  // three-term boundary formula
  double residual = 0.0;
};

inline InnerProductCheck inner_product_check(const StarGraph& g, const BoundaryConditions& bc, Complex lambda,
                                             const CVector& f, const Forcing& v,
                                             InnerProductForm form = InnerProductForm::Adjoint) {
  const FrameSolution sol = solve_trace_bvp(g, bc, lambda, f);
  const BoundaryData ubd = sol.boundary_data();
  InnerProductCheck out;
  out.direct = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& e = g.edges[j];
    const auto J = static_cast<Eigen::Index>(j);
    const auto q = composite_rule(panel_cuts(e, 0.0, e.length, edge_grid(e.length)));
    const auto ts = transfer_sweep(e, lambda, 0.0, q.x);
    const Vec2 s0(ubd.values_at_0(J), ubd.derivs_at_0(J));
    for (std::size_t k = 0; k < q.x.size(); ++k) out.direct += q.w[k] * (ts[k] * s0)(0) * std::conj(v(j, q.x[k]));
  }

  BoundaryData wbd;
  if (form == InnerProductForm::Adjoint) {
    wbd = resolvent_apply(g, bc, std::conj(lambda), v).boundary_data();
  } else {
    wbd = resolvent_apply(g, bc, lambda, v).boundary_data();
    wbd.values_at_ell = wbd.values_at_ell.conjugate();
    wbd.derivs_at_ell = wbd.derivs_at_ell.conjugate();
    wbd.values_at_0 = wbd.values_at_0.conjugate();
    wbd.derivs_at_0 = wbd.derivs_at_0.conjugate();
  }
  const ProjectionSet ps = build_projections(bc);
  const AdjustmentVectors av = adjustment_vectors(ps);
  const CVector a = (av.L + av.M) * f, b = av.N * f;
  out.boundary = dirichlet_trace(wbd).dot(a) + neumann_trace(wbd).dot(b);
  const double diff = std::abs(out.direct - out.boundary);
  const double scale = std::max(std::abs(out.direct), std::abs(out.boundary));
  out.residual = scale > 1e-12 ? diff / scale : diff;
  return out;
}

// ---------------------------------------------------------------------------
// Solutions with a unit Gamma-trace

/** \brief u_{Gamma,i} on a grid of each edge, by the kernel formula and by a direct solve. */
struct UGammaResult {
  std::size_t index = 0;
  Complex lambda;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<Vec2>> formula, direct;  // (u, u') per point
  double discrepancy = 0.0;        // sup |u_formula - u_direct|
  double deriv_discrepancy = 0.0;  // sup |u'_formula - u'_direct|
};

// Dirichlet and Neumann traces of R_{mu} delta_t on edge j, as functions of t (with their t-derivatives).
struct TraceKernel {
  CVector KD, KN, dKD, dKN;
};

namespace detail {

struct KernelData {
  FundamentalFrame fr;
  TauSelection ts;
  CMatrix kappa;  // column j: C^{-1}(alpha1 e_j y(0) + alpha2 e_j y'(0))
};

inline KernelData kernel_data(const StarGraph& g, const BoundaryConditions& bc, Complex mu) {
  KernelData kd{fundamental_frame(g, bc, mu), {}, {}};
  require_off_spectrum(kd.fr);
  kd.ts = select_tau(kd.fr, bc);
  const CMatrix C = c_matrix(kd.fr, bc);
  const auto n = static_cast<Eigen::Index>(g.size());
  CMatrix rho(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto J = static_cast<std::size_t>(j);
    rho.col(j) = bc.alpha1.col(j) * kd.ts.y_start[J](0) + bc.alpha2.col(j) * kd.ts.y_start[J](1);
  }
  kd.kappa = C.partialPivLu().solve(rho);
  return kd;
}

inline TraceKernel trace_kernel(const KernelData& kd, std::size_t j, const Vec2& y, const Vec2& z) {
  const auto n = static_cast<Eigen::Index>(kd.ts.size());
  const auto J = static_cast<Eigen::Index>(j);
  const Complex D = kd.ts.D[j];
  const auto& fr = kd.fr;
  TraceKernel k{CVector::Zero(2 * n), CVector::Zero(2 * n), CVector::Zero(2 * n), CVector::Zero(2 * n)};
  for (int d = 0; d < 2; ++d) {
    const Complex zt = z(d) / D, yt = y(d) / D;
    CVector& KD = d == 0 ? k.KD : k.dKD;
    CVector& KN = d == 0 ? k.KN : k.dKN;
    for (Eigen::Index m = 0; m < n; ++m) {
      const auto M = static_cast<std::size_t>(m);
      const Vec2 zl = kd.ts.z_end[M];
      const Complex c = zt * kd.kappa(m, J);
      KD(m) = c * zl(0);
      KN(m) = c * zl(1);
      KD(n + m) = c * fr.Z(m, m);
      KN(n + m) = -c * fr.Zp(m, m);
    }
    const Vec2 zl = kd.ts.z_end[j];
    const Vec2 y0 = kd.ts.y_start[j];
    KD(J) -= zl(0) * yt;
    KN(J) -= zl(1) * yt;
    KD(n + J) -= y0(0) * zt;
    KN(n + J) += y0(1) * zt;
  }
  return k;
}

}  // namespace detail

inline UGammaResult u_gamma(const StarGraph& g, const BoundaryConditions& bc, Complex lambda, std::size_t i,
                            std::size_t points = 65) {
  require_compatible(g, bc);
  const std::size_t n = g.size();
  if (i >= 2 * n) throw Error(ErrorCode::DimensionMismatch, "trace index out of range");
  UGammaResult res;
  res.index = i;
  res.lambda = lambda;

  // kernels of the adjoint resolvent, conjugated
  const detail::KernelData kd = detail::kernel_data(g, bc, std::conj(lambda));
  const ProjectionSet ps = build_projections(bc);
  const AdjustmentVectors av = adjustment_vectors(ps);
  const auto I = static_cast<Eigen::Index>(i);
  const CVector a = av.L.col(I) + av.M.col(I), b = av.N.col(I);

  CVector f = CVector::Zero(static_cast<Eigen::Index>(2 * n));
  f(I) = 1.0;
  const FrameSolution sol = solve_trace_bvp(g, bc, lambda, f);
  const BoundaryData bd = sol.boundary_data();

  for (std::size_t j = 0; j < n; ++j) {
    const auto& e = g.edges[j];
    const auto J = static_cast<Eigen::Index>(j);
    const auto xs = edge_grid(e.length, points);
    std::vector<Vec2> y, z;
    detail::partner_states(e, kd.ts, j, xs, y, z);
    const auto td = transfer_sweep(e, lambda, 0.0, xs);
    const Vec2 s0(bd.values_at_0(J), bd.derivs_at_0(J));
    std::vector<Vec2> fv, dv;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const TraceKernel tk = detail::trace_kernel(kd, j, y[k], z[k]);
      const Vec2 uf(tk.KD.dot(a) + tk.KN.dot(b), tk.dKD.dot(a) + tk.dKN.dot(b));
      const Vec2 ud = td[k] * s0;
      res.discrepancy = std::max(res.discrepancy, std::abs(uf(0) - ud(0)));
      res.deriv_discrepancy = std::max(res.deriv_discrepancy, std::abs(uf(1) - ud(1)));
      fv.push_back(uf);
      dv.push_back(ud);
    }
    res.x.push_back(xs);
    res.formula.push_back(std::move(fv));
    res.direct.push_back(std::move(dv));
  }
  return res;
}

}  // namespace qgraph

#endif  // QGRAPH_RESOLVENT_HPP
