#ifndef QGRAPH_POTENTIAL_HPP
#define QGRAPH_POTENTIAL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace qgraph {

/** \brief Potential on one edge: piecewise constant or sampled with linear interpolation. */
class PotentialProfile {
 public:
  enum class Kind { PiecewiseConstant, Sampled };

  PotentialProfile() = default;

  static PotentialProfile zero(double length) { return piecewise_constant({0.0, length}, {0.0}); }

  static PotentialProfile constant(double length, double nu) { return piecewise_constant({0.0, length}, {nu}); }

  // breaks = b_0 = 0 < b_1 < ... < b_m = length, values has m entries.
  static PotentialProfile piecewise_constant(std::vector<double> breaks, std::vector<double> values) {
    if (breaks.size() < 2 || values.size() + 1 != breaks.size())
      throw Error(ErrorCode::InvalidPotential, "piecewise constant profile needs m values and m+1 breakpoints");
    if (breaks.front() != 0.0) throw Error(ErrorCode::InvalidPotential, "profile must start at 0");
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] > breaks[i - 1])) throw Error(ErrorCode::InvalidPotential, "breakpoints must increase strictly");
    for (double v : values)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidPotential, "non-finite potential value");
    PotentialProfile p;
    p.kind_ = Kind::PiecewiseConstant;
    p.x_ = std::move(breaks);
    p.v_ = std::move(values);
    return p;
  }

  static PotentialProfile sampled(std::vector<double> x, std::vector<double> v) {
    if (x.size() < 2 || x.size() != v.size())
      throw Error(ErrorCode::InvalidPotential, "sampled profile needs matching grids of at least 2 points");
    if (x.front() != 0.0) throw Error(ErrorCode::InvalidPotential, "profile must start at 0");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw Error(ErrorCode::InvalidPotential, "sample grid must increase strictly");
    for (double y : v)
      if (!std::isfinite(y)) throw Error(ErrorCode::InvalidPotential, "non-finite potential value");
    PotentialProfile p;
    p.kind_ = Kind::Sampled;
    p.x_ = std::move(x);
    p.v_ = std::move(v);
    return p;
  }

  Kind kind() const { return kind_; }
  double length() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return v_; }

  // Points where the profile (or its slope) may jump; quadrature and ODE steps align to these.
  const std::vector<double>& breakpoints() const { return x_; }

  // Index of the piece containing x; pieces are [x_k, x_{k+1}).
  std::size_t piece_index(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  double operator()(double x) const {
    const std::size_t k = piece_index(x);
    if (kind_ == Kind::PiecewiseConstant) return v_[k];
    const double t = (x - x_[k]) / (x_[k + 1] - x_[k]);
    return (1.0 - t) * v_[k] + t * v_[k + 1];
  }

  // Value on the piece k (piecewise constant) or at the midpoint side of the piece.
  double piece_value(std::size_t k) const { return v_[k]; }

  // Profile of the sub-interval [a, b], re-based so that a maps to 0.
  PotentialProfile restrict(double a, double b) const {
    if (!(a >= 0.0 && b <= length() && a < b)) throw Error(ErrorCode::OutOfDomain, "restriction outside profile");
    std::vector<double> nx{0.0};
    std::vector<double> nv;
    if (kind_ == Kind::PiecewiseConstant) {
      for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
        const double lo = std::max(a, x_[k]);
        const double hi = std::min(b, x_[k + 1]);
        if (hi > lo) {
          nx.push_back(hi == b ? b - a : hi - a);
          nv.push_back(v_[k]);
        }
      }
      return piecewise_constant(std::move(nx), std::move(nv));
    }
    nv.push_back((*this)(a));
    for (std::size_t k = 0; k < x_.size(); ++k)
      if (x_[k] > a && x_[k] < b) {
        nx.push_back(x_[k] - a);
        nv.push_back(v_[k]);
      }
    nx.push_back(b - a);
    nv.push_back((*this)(b));
    return sampled(std::move(nx), std::move(nv));
  }

 private:
  Kind kind_ = Kind::PiecewiseConstant;
  std::vector<double> x_{0.0, 1.0};
  std::vector<double> v_{0.0};
};

}  // namespace qgraph

#endif  // QGRAPH_POTENTIAL_HPP
