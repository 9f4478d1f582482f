#ifndef QGRAPH_DOPRI_HPP
#define QGRAPH_DOPRI_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "linalg.hpp"

namespace qgraph {

/** \brief Dormand-Prince 5(4) for the 2x2 matrix system Y' = A(x) Y, A = [[0,1],[V(x)-lambda,0]].
 *
 * Steps are rejected on the embedded error estimate and additionally when the
 * determinant (the Wronskian of the two columns) drifts. Requested output
 * points inside a step are filled from the continuous extension.
 */
struct DopriOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double wronskian_tol = 1e-9;
  double min_step = 1e-14;
  long max_steps = 2000000;
};

namespace detail {

struct DopriCoefficients {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

// Integrates from x0 to x1 (either direction) with V given by `pot`; the potential is assumed smooth
// on [x0, x1]. Outputs at `targets` (monotone in the integration direction, inside [x0,x1]) are
// written to `out`. Returns Y(x1). `h` carries the step size between calls.
template <class Pot>
Mat2 dopri_segment(const Pot& pot, Complex lambda, double x0, double x1, const Mat2& y0,
                   const std::vector<double>& targets, std::vector<Mat2>& out, double& h,
                   const DopriOptions& opt = {}) {
  using C = detail::DopriCoefficients;
  out.clear();
  const double dir = x1 >= x0 ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);
  if (span == 0.0) {
    out.assign(targets.size(), y0);
    return y0;
  }
  auto rhs = [&](double x, const Mat2& y) {
    Mat2 a;
    a << 0.0, 1.0, Complex(pot(x)) - lambda, 0.0;
    return Mat2(a * y);
  };
  auto wscale = [](const Mat2& y) { return std::abs(y(0, 0) * y(1, 1)) + std::abs(y(0, 1) * y(1, 0)); };

  double x = x0;
  Mat2 y = y0;
  Mat2 k1 = rhs(x, y);
  h = std::min(std::abs(h) > 0.0 ? std::abs(h) : 0.01, span);
  std::size_t next = 0;
  long steps = 0;
  while (dir * (x1 - x) > 0.0) {
    if (++steps > opt.max_steps) throw Error(ErrorCode::StepSizeUnderflow, "too many integration steps");
    double step = std::min(h, std::abs(x1 - x));
    const double hs = dir * step;
    const Mat2 k2 = rhs(x + C::c2 * hs, y + hs * C::a21 * k1);
    const Mat2 k3 = rhs(x + C::c3 * hs, y + hs * (C::a31 * k1 + C::a32 * k2));
    const Mat2 k4 = rhs(x + C::c4 * hs, y + hs * (C::a41 * k1 + C::a42 * k2 + C::a43 * k3));
    const Mat2 k5 = rhs(x + C::c5 * hs, y + hs * (C::a51 * k1 + C::a52 * k2 + C::a53 * k3 + C::a54 * k4));
    const Mat2 k6 =
        rhs(x + hs, y + hs * (C::a61 * k1 + C::a62 * k2 + C::a63 * k3 + C::a64 * k4 + C::a65 * k5));
    const Mat2 y1 = y + hs * (C::a71 * k1 + C::a73 * k3 + C::a74 * k4 + C::a75 * k5 + C::a76 * k6);
    const Mat2 k7 = rhs(x + hs, y1);
    const Mat2 e = hs * (C::e1 * k1 + C::e3 * k3 + C::e4 * k4 + C::e5 * k5 + C::e6 * k6 + C::e7 * k7);

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y1(i)));
      const double r = std::abs(e(i)) / sc;
      err += r * r;
    }
    err = std::sqrt(err / 4.0);
    const double drift = std::abs(y1.determinant() - y.determinant());
    const bool wronskian_ok = drift <= opt.wronskian_tol * std::max(wscale(y), wscale(y1));

    if (err <= 1.0 && wronskian_ok) {
      const double xn = x + hs;
      while (next < targets.size() && dir * (targets[next] - xn) <= 0.0) {
        const double th = (targets[next] - x) / hs;
        const Mat2 r2 = y1 - y;
        const Mat2 r3 = hs * k1 - r2;
        const Mat2 r4 = r2 - hs * k7 - r3;
        const Mat2 r5 = hs * (C::d1 * k1 + C::d3 * k3 + C::d4 * k4 + C::d5 * k5 + C::d6 * k6 + C::d7 * k7);
        out.push_back(y + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5))));
        ++next;
      }
      x = (step == std::abs(x1 - x)) ? x1 : xn;
      y = y1;
      k1 = k7;
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = step * std::clamp(fac, 0.2, 5.0);
    } else {
      const double fac = wronskian_ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
      h = step * fac;
      if (h < opt.min_step) throw Error(ErrorCode::StepSizeUnderflow, "adaptive step size underflow");
    }
  }
  while (next < targets.size()) {
    out.push_back(y);
    ++next;
  }
  return y;
}

}  // namespace qgraph

#endif  // QGRAPH_DOPRI_HPP
