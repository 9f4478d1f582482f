#ifndef QGRAPH_COUNTING_HPP
#define QGRAPH_COUNTING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "maps.hpp"
#include "sweep.hpp"

namespace qgraph {

struct Root {
  double location;
  int multiplicity;
};

struct CountReport {
  double lo = 0.0, hi = 0.0;
  std::vector<Root> zeros;
  std::vector<Root> poles;
  int count = 0;    // zeros with multiplicity
  int delta_N = 0;  // zeros - poles (maps only)
  double scale = 0.0;  // median |f| over the grid
  std::vector<std::string> warnings;

  int pole_count() const {
    int s = 0;
    for (const auto& p : poles) s += p.multiplicity;
    return s;
  }
};

enum class EndpointPolicy { Nudge, Throw };

struct CountOptions {
  std::size_t grid = 0;  // 0: 512 points per unit of sqrt(lambda) span
  double refine_tol = 1e-10;
  double tangency_tol = 1e-9;
  EndpointPolicy endpoints = EndpointPolicy::Nudge;
  unsigned threads = 0;  // 0: sweep_threads()
};

using RealFunction = std::function<double(double)>;

inline double signed_sqrt(double x) { return x >= 0 ? std::sqrt(x) : -std::sqrt(-x); }

inline std::size_t default_grid(double a, double b) {
  const double span = signed_sqrt(b) - signed_sqrt(a);
  return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(512.0 * span)));
}

namespace detail {

inline double bisect(const RealFunction& f, double lo, double hi, double flo, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section search for the minimum of |f| on [a, b].
inline double golden_min(const RealFunction& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = std::abs(f(c)), fd = std::abs(f(d));
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = std::abs(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = std::abs(f(d));
    }
    if (c >= d) break;
  }
  return 0.5 * (a + b);
}

inline double median_abs(std::vector<double> v) {
  for (auto& x : v) x = std::abs(x);
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

inline CountReport scan(const RealFunction& f, double a, double b, const CountOptions& opt) {
  CountReport rep;
  rep.lo = a;
  rep.hi = b;
  const std::size_t n = std::max<std::size_t>(64, opt.grid ? opt.grid : default_grid(a, b));
  const auto xs = linspace(a, b, n);
  const auto fs = parallel_map<double>(xs, f, opt.threads ? opt.threads : sweep_threads());
  const double scale = median_abs(fs);
  rep.scale = scale;
  const double h = (b - a) / static_cast<double>(n - 1);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double f0 = fs[i], f1 = fs[i + 1];
    if (f0 == 0.0) {
      if (i == 0) continue;
      const bool flip = (fs[i - 1] > 0) != (f1 > 0);
      rep.zeros.push_back({xs[i], flip ? 1 : 2});
      continue;
    }
    if (f1 != 0.0 && (f0 > 0) != (f1 > 0)) rep.zeros.push_back({bisect(f, xs[i], xs[i + 1], f0, opt.refine_tol), 1});
  }
  // Tangential zeros: interior local minima of |f| with no sign change on either side.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double fm = fs[i - 1], f0 = fs[i], fp = fs[i + 1];
    if (f0 == 0.0 || (fm > 0) != (f0 > 0) || (f0 > 0) != (fp > 0)) continue;
    if (!(std::abs(f0) <= std::abs(fm) && std::abs(f0) <= std::abs(fp))) continue;
    const double x = golden_min(f, xs[i - 1], xs[i + 1], std::max(opt.refine_tol, 1e-12 * (1.0 + std::abs(xs[i]))));
    const double fx = f(x);
    if (fx != 0.0 && (fx > 0) != (f0 > 0)) {
      // two simple zeros inside one pair of cells
      rep.zeros.push_back({bisect(f, xs[i - 1], x, fm, opt.refine_tol), 1});
      rep.zeros.push_back({bisect(f, x, xs[i + 1], fx, opt.refine_tol), 1});
    } else if (std::abs(fx) < opt.tangency_tol * scale) {
      rep.zeros.push_back({x, 2});
    }
  }
  std::sort(rep.zeros.begin(), rep.zeros.end(), [](const Root& p, const Root& q) { return p.location < q.location; });
  for (std::size_t k = 1; k < rep.zeros.size(); ++k)
    if (rep.zeros[k].location - rep.zeros[k - 1].location < 2.0 * h)
      rep.warnings.push_back("GridTooCoarse: zeros near " + std::to_string(rep.zeros[k].location) +
                             " are closer than two grid cells");
  for (const auto& z : rep.zeros) rep.count += z.multiplicity;
  return rep;
}

}  // namespace detail

// Zeros of a real function on [a, b] by sign changes plus tangency probing.
inline CountReport count_zeros(const RealFunction& f, double a, double b, const CountOptions& opt = {}) {
  if (!(b > a)) throw Error(ErrorCode::OutOfDomain, "interval must satisfy a < b");
  double lo = a, hi = b;
  std::vector<std::string> notes;
  for (int attempt = 0; attempt < 4; ++attempt) {
    auto rep = detail::scan(f, lo, hi, opt);
    const double guard = 10.0 * opt.refine_tol;
    bool moved = false;
    const double flat = 1e-12 * rep.scale;
    const bool at_lo = std::abs(f(lo)) <= flat || (!rep.zeros.empty() && rep.zeros.front().location - lo < guard);
    const bool at_hi = std::abs(f(hi)) <= flat || (!rep.zeros.empty() && hi - rep.zeros.back().location < guard);
    if (at_lo || at_hi) {
      if (opt.endpoints == EndpointPolicy::Throw)
        throw Error(ErrorCode::EndpointOnSpectrum, "interval endpoint lies on a zero");
      if (at_lo) lo += guard;
      if (at_hi) hi -= guard;
      notes.push_back("endpoint nudged off a zero by " + std::to_string(guard));
      moved = true;
    }
    if (!moved) {
      rep.warnings.insert(rep.warnings.end(), notes.begin(), notes.end());
      return rep;
    }
  }
  throw Error(ErrorCode::EndpointOnSpectrum, "could not move endpoints off the zero set");
}

// Real-valued version of the Evans function for counting. For real data E is real on the real
// axis; otherwise a constant phase is removed, taken from the largest sample on the interval.
inline RealFunction real_evans_function(const StarGraph& g, const BoundaryConditions& bc, double a, double b) {
  const bool real_data = bc.alpha1.imag().isZero(0.0) && bc.alpha2.imag().isZero(0.0) &&
                         bc.beta1.imag().isZero(0.0) && bc.beta2.imag().isZero(0.0);
  if (real_data) return [g, bc](double l) { return evans(g, bc, l).real(); };
  Complex best = 1.0;
  for (double x : linspace(a, b, 33)) {
    const Complex e = evans(g, bc, x);
    if (std::abs(e) > std::abs(best) || best == 1.0) best = e;
  }
  const Complex phase = best == 0.0 ? Complex(1.0) : best / std::abs(best);
  return [g, bc, phase](double l) { return (evans(g, bc, l) * std::conj(phase)).real(); };
}

inline CountReport count_eigenvalues(const StarGraph& g, const BoundaryConditions& bc, double a, double b,
                                     const CountOptions& opt = {}) {
  require_compatible(g, bc);
  return count_zeros(real_evans_function(g, bc, a, b), a, b, opt);
}

// Estimated pole order from the growth of |f| towards p on both sides.
inline double observed_pole_order(const RealFunction& f, double p) {
  const double d = 1e-6 * (1.0 + std::abs(p));
  double acc = 0.0;
  for (double s : {-1.0, 1.0}) acc += std::log2(std::abs(f(p + s * d / 2)) / std::abs(f(p + s * d)));
  return acc / 2.0;
}

// Zeros minus poles of a meromorphic map. Pole candidates come from the independently counted
// denominators, merged when they coincide; zeros are counted between candidates.
inline CountReport map_delta(const RealFunction& map, const std::vector<RealFunction>& denominators, double a, double b,
                             const CountOptions& opt = {}) {
  CountReport rep;
  rep.lo = a;
  rep.hi = b;
  std::vector<Root> raw;
  for (const auto& d : denominators) {
    CountOptions o = opt;
    o.endpoints = EndpointPolicy::Throw;
    CountReport c;
    try {
      c = count_zeros(d, a, b, o);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EndpointOnSpectrum) throw Error(ErrorCode::PoleOnBoundary, "interval endpoint is a pole");
      throw;
    }
    raw.insert(raw.end(), c.zeros.begin(), c.zeros.end());
    rep.warnings.insert(rep.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  std::sort(raw.begin(), raw.end(), [](const Root& p, const Root& q) { return p.location < q.location; });
  for (const auto& r : raw) {
    if (!rep.poles.empty() && std::abs(r.location - rep.poles.back().location) <= 1e-8 * (1.0 + std::abs(r.location)))
      rep.poles.back().multiplicity += r.multiplicity;
    else
      rep.poles.push_back(r);
  }
  // A denominator zero shared with the numerator cancels; the map's own order decides.
  std::vector<Root> candidates;
  candidates.swap(rep.poles);
  std::vector<Root> on_candidates;
  for (const auto& p : candidates) {
    const double seen = observed_pole_order(map, p.location);
    const int k = static_cast<int>(std::lround(seen));
    if (std::abs(seen - k) > 0.25 || k > p.multiplicity)
      rep.warnings.push_back("pole near " + std::to_string(p.location) + " has unresolved observed order " + std::to_string(seen));
    if (k != p.multiplicity)
      rep.warnings.push_back("denominator zero of order " + std::to_string(p.multiplicity) + " near " + std::to_string(p.location) +
                             " leaves a map order of " + std::to_string(k));
    if (k > 0) rep.poles.push_back({p.location, k});
    if (k < 0) on_candidates.push_back({p.location, -k});
  }

  const std::size_t total = opt.grid ? opt.grid : default_grid(a, b);
  std::vector<double> cuts{a};
  for (const auto& p : candidates) cuts.push_back(p.location);
  cuts.push_back(b);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double ml = k == 0 ? 0.0 : std::max(1e-7 * (1.0 + std::abs(cuts[k])), 100.0 * opt.refine_tol);
    const double mr = k + 2 == cuts.size() ? 0.0 : std::max(1e-7 * (1.0 + std::abs(cuts[k + 1])), 100.0 * opt.refine_tol);
    const double lo = cuts[k] + ml, hi = cuts[k + 1] - mr;
    if (!(hi > lo)) continue;
    CountOptions o = opt;
    o.grid = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(static_cast<double>(total) * (hi - lo) / (b - a))));
    const auto c = count_zeros(map, lo, hi, o);
    rep.zeros.insert(rep.zeros.end(), c.zeros.begin(), c.zeros.end());
    rep.warnings.insert(rep.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  rep.zeros.insert(rep.zeros.end(), on_candidates.begin(), on_candidates.end());
  std::sort(rep.zeros.begin(), rep.zeros.end(), [](const Root& p, const Root& q) { return p.location < q.location; });
  for (const auto& z : rep.zeros) rep.count += z.multiplicity;
  rep.delta_N = rep.count - rep.pole_count();
  return rep;
}

// ---------------------------------------------------------------------------
// Counting identities

struct PieceCount {
  std::string label;
  CountReport report;
};

struct CountingIdentity {
  CountReport full;
  std::vector<PieceCount> pieces;
  CountReport map;
  bool holds = false;

  int rhs() const {
    int s = map.delta_N;
    for (const auto& p : pieces) s += p.report.count;
    return s;
  }
  std::string equation() const {
    std::string s = std::to_string(full.count) + " =";
    for (std::size_t k = 0; k < pieces.size(); ++k) s += (k ? " + " : " ") + std::to_string(pieces[k].report.count);
    s += " + " + std::to_string(map.delta_N);
    return s;
  }
};

inline PoleOptions counting_pole_options() {
  PoleOptions o;
  o.hadamard_tol = 0.0;  // only an exact zero denominator is rejected while sweeping
  return o;
}

// Map used for counting: M1 + M2 for a single cut, det(M1 + M2) for double cuts.
inline RealFunction split_map_function(const SplitResult& sr) {
  using CC = CutCondition;
  const auto po = counting_pole_options();
  switch (sr.spec.mode) {
    case SplitMode::SingleCut:
      return [sr, po](double l) {
        const auto m1 = map_M1(sr.get(Region::Omega1, {CC::D}), l, po);
        const auto m2 = map_M2(sr.get(Region::Omega2, {CC::D}), sr.spec.cuts[0].edge, l, po);
        return two_sided_sum(m1, m2).real();
      };
    case SplitMode::DoubleSameWire:
      return [sr, po](double l) { return two_sided_2x2_same_wire(sr, l, po).det_sum().real(); };
    case SplitMode::DoubleTwoWires:
      return [sr, po](double l) { return two_sided_2x2_two_wires(sr, l, po).det_sum().real(); };
  }
  throw Error(ErrorCode::InvalidSplit, "unknown split mode");
}

// Dirichlet-variant pieces whose spectra enter the counting identity, in identity order.
inline std::vector<const Subproblem*> identity_pieces(const SplitResult& sr) {
  using CC = CutCondition;
  switch (sr.spec.mode) {
    case SplitMode::SingleCut: return {&sr.get(Region::Omega1, {CC::D}), &sr.get(Region::Omega2, {CC::D})};
    case SplitMode::DoubleSameWire:
      return {&sr.get(Region::Omega1, {CC::D}), &sr.get(Region::Omega1Tilde, {CC::D, CC::D}),
              &sr.get(Region::Omega2Tilde, {CC::D})};
    case SplitMode::DoubleTwoWires:
      return {&sr.get(Region::Omega1, {CC::D}), &sr.get(Region::Omega1Tilde, {CC::D}),
              &sr.get(Region::Omega2Tilde, {CC::D, CC::D})};
  }
  return {};
}

inline CountingIdentity verify_counting(const StarGraph& g, const BoundaryConditions& bc, const SplitSpec& spec,
                                        double a, double b, const CountOptions& opt = {}) {
  const auto sr = split_graph(g, bc, spec);
  CountOptions o = opt;
  o.endpoints = EndpointPolicy::Throw;
  CountingIdentity id;
  id.full = count_eigenvalues(g, bc, a, b, o);
  std::vector<RealFunction> denoms;
  for (const auto* p : identity_pieces(sr)) {
    auto f = real_evans_function(p->graph, p->bc, a, b);
    id.pieces.push_back({piece_label(p->region, p->conditions), count_zeros(f, a, b, o)});
    denoms.push_back(f);
  }
  try {
    id.map = map_delta(split_map_function(sr), denoms, a, b, o);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::PoleOnBoundary) throw Error(ErrorCode::EndpointOnSpectrum, e.what());
    throw;
  }
  id.holds = id.full.count == id.rhs();
  return id;
}

}  // namespace qgraph

#endif  // QGRAPH_COUNTING_HPP
