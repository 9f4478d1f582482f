#ifndef QGRAPH_PROPAGATOR_HPP
#define QGRAPH_PROPAGATOR_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dopri.hpp"
#include "graph.hpp"

namespace qgraph {

struct StateVector {
  Complex value;
  Complex deriv;
  double x = 0.0;
  Complex lambda;

  Vec2 vec() const { return Vec2(value, deriv); }
};

enum class PropagationMethod { Auto, Exact, Adaptive };

// Transfer matrix across a segment of length d (signed) with constant potential nu.
// Entries cos(w d), sin(w d)/w, -w sin(w d), cos(w d) with w^2 = lambda - nu; only even
// functions of w appear so the branch of the root is irrelevant.
inline Mat2 segment_transfer(Complex lambda, double nu, double d) {
  const Complex w2 = lambda - nu;
  const Complex w = std::sqrt(w2);
  const Complex wd = w * d;
  Complex s;  // sin(w d) / w
  if (std::abs(wd) < 1e-4) {
    const Complex z = wd * wd;
    s = d * (1.0 - z / 6.0 + z * z / 120.0);
  } else {
    s = std::sin(wd) / w;
  }
  const Complex c = std::cos(wd);
  Mat2 t;
  t << c, s, -w2 * s, c;
  return t;
}

namespace detail {

inline double clamp_to_edge(const EdgeSpec& e, double x) {
  const double tol = 1e-12 * e.length;
  if (!(x >= -tol && x <= e.length + tol)) throw Error(ErrorCode::OutOfDomain, "position outside edge");
  return std::clamp(x, 0.0, e.length);
}

// Walks the pieces of the profile between x0 and x1, calling f(a, b, k) for each sub-interval.
template <class F>
void for_each_piece(const PotentialProfile& p, double x0, double x1, F&& f) {
  const auto& nodes = p.nodes();
  if (x1 >= x0) {
    std::size_t k = p.piece_index(x0);
    double a = x0;
    while (a < x1) {
      const double b = std::min(nodes[k + 1], x1);
      if (b > a) f(a, b, k);
      a = b;
      if (k + 2 >= nodes.size()) break;
      ++k;
    }
  } else {
    std::size_t k = p.piece_index(x0);
    if (k > 0 && x0 <= nodes[k]) --k;
    double a = x0;
    while (a > x1) {
      const double b = std::max(nodes[k], x1);
      if (b < a) f(a, b, k);
      a = b;
      if (k == 0) break;
      --k;
    }
  }
}

inline Mat2 exact_transfer(const EdgeSpec& e, Complex lambda, double x0, double x1) {
  Mat2 t = Mat2::Identity();
  for_each_piece(e.potential, x0, x1,
                 [&](double a, double b, std::size_t k) { t = segment_transfer(lambda, e.potential.piece_value(k), b - a) * t; });
  return t;
}

// Adaptive propagation from x0 through monotone targets; returns transfer matrices at each target.
inline std::vector<Mat2> adaptive_walk(const EdgeSpec& e, Complex lambda, double x0,
                                       const std::vector<double>& targets) {
  std::vector<Mat2> result;
  if (targets.empty()) return result;
  result.reserve(targets.size());
  const double x1 = targets.back();
  const double dir = x1 >= x0 ? 1.0 : -1.0;
  Mat2 y = Mat2::Identity();
  double h = 0.0;
  std::size_t next = 0;
  std::vector<double> local;
  std::vector<Mat2> out;
  // targets equal to x0 come first
  while (next < targets.size() && targets[next] == x0) {
    result.push_back(y);
    ++next;
  }
  const auto& prof = e.potential;
  for_each_piece(prof, x0, x1, [&](double a, double b, std::size_t k) {
    local.clear();
    while (next < targets.size() && dir * (targets[next] - b) <= 0.0) local.push_back(targets[next++]);
    if (prof.kind() == PotentialProfile::Kind::PiecewiseConstant) {
      const double nu = prof.piece_value(k);
      y = dopri_segment([nu](double) { return nu; }, lambda, a, b, y, local, out, h);
    } else {
      y = dopri_segment([&prof](double x) { return prof(x); }, lambda, a, b, y, local, out, h);
    }
    result.insert(result.end(), out.begin(), out.end());
  });
  while (result.size() < targets.size()) result.push_back(y);
  return result;
}

inline bool use_exact(const EdgeSpec& e, PropagationMethod m) {
  if (m == PropagationMethod::Exact) {
    if (e.potential.kind() != PotentialProfile::Kind::PiecewiseConstant)
      throw Error(ErrorCode::InvalidPotential, "exact propagation needs a piecewise constant potential");
    return true;
  }
  return m == PropagationMethod::Auto && e.potential.kind() == PotentialProfile::Kind::PiecewiseConstant;
}

}  // namespace detail

// Maps (u, u') at x0 to (u, u') at x1 along edge e.
inline Mat2 transfer(const EdgeSpec& e, Complex lambda, double x0, double x1,
                     PropagationMethod m = PropagationMethod::Auto) {
  x0 = detail::clamp_to_edge(e, x0);
  x1 = detail::clamp_to_edge(e, x1);
  if (detail::use_exact(e, m)) return detail::exact_transfer(e, lambda, x0, x1);
  return detail::adaptive_walk(e, lambda, x0, {x1}).front();
}

// Transfer matrices from x0 to every point of xs (any order).
inline std::vector<Mat2> transfer_sweep(const EdgeSpec& e, Complex lambda, double x0, const std::vector<double>& xs,
                                        PropagationMethod m = PropagationMethod::Auto) {
  x0 = detail::clamp_to_edge(e, x0);
  std::vector<double> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts[i] = detail::clamp_to_edge(e, xs[i]);
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  std::vector<std::size_t> fwd, bwd;
  for (auto i : idx) (pts[i] >= x0 ? fwd : bwd).push_back(i);
  std::reverse(bwd.begin(), bwd.end());

  std::vector<Mat2> res(xs.size());
  const bool exact = detail::use_exact(e, m);
  for (const auto* dir : {&fwd, &bwd}) {
    std::vector<double> targets;
    for (auto i : *dir) targets.push_back(pts[i]);
    if (exact) {
      Mat2 t = Mat2::Identity();
      double cur = x0;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        t = detail::exact_transfer(e, lambda, cur, targets[k]) * t;
        cur = targets[k];
        res[(*dir)[k]] = t;
      }
    } else {
      const auto ts = detail::adaptive_walk(e, lambda, x0, targets);
      for (std::size_t k = 0; k < targets.size(); ++k) res[(*dir)[k]] = ts[k];
    }
  }
  return res;
}

inline StateVector propagate(const EdgeSpec& e, Complex lambda, const StateVector& from, double to_x,
                             PropagationMethod m = PropagationMethod::Auto) {
  const Vec2 r = transfer(e, lambda, from.x, to_x, m) * from.vec();
  return {r(0), r(1), detail::clamp_to_edge(e, to_x), lambda};
}

inline Complex wronskian(const StateVector& a, const StateVector& b) {
  if (a.x != b.x) throw Error(ErrorCode::MismatchedEvaluationPoint, "Wronskian of states at different points");
  return a.value * b.deriv - a.deriv * b.value;
}

/** \brief phi(s) = 0, phi'(s) = 1 and theta(s) = 1, theta'(s) = 0 at the anchor s. */
struct BasisPair {
  EdgeSpec edge;
  Complex lambda;
  double anchor = 0.0;

  StateVector phi(double x) const { return propagate(edge, lambda, {0.0, 1.0, anchor, lambda}, x); }
  StateVector theta(double x) const { return propagate(edge, lambda, {1.0, 0.0, anchor, lambda}, x); }
};

inline BasisPair basis_pair(const EdgeSpec& e, Complex lambda, double anchor) {
  return {e, lambda, detail::clamp_to_edge(e, anchor)};
}

}  // namespace qgraph

#endif  // QGRAPH_PROPAGATOR_HPP
