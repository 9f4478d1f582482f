#ifndef QGRAPH_LINALG_HPP
#define QGRAPH_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "error.hpp"

namespace qgraph {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr Complex I_unit{0.0, 1.0};

// Partial-pivoting LU determinant.
inline Complex det(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "det of non-square matrix");
  if (m.rows() == 0) return 1.0;
  return m.partialPivLu().determinant();
}

inline CVector lu_solve(const CMatrix& a, const CVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "lu_solve dimensions");
  return a.partialPivLu().solve(b);
}

// Cramer's rule, used as the second algorithm next to LU for small systems.
inline CVector cramer_solve(const CMatrix& a, const CVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "cramer_solve dimensions");
  const Complex d = det(a);
  CVector x(a.rows());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    CMatrix ak = a;
    ak.col(k) = b;
    x(k) = det(ak) / d;
  }
  return x;
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// sigma_min / sigma_max of a (possibly wide) matrix; zero for the zero matrix.
inline double singular_ratio(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

// Orthonormal basis of ker(m) using a relative singular-value cutoff.
inline CMatrix kernel_basis(const CMatrix& m, double rel_tol = 1e-10) {
  const Eigen::Index cols = m.cols();
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (smax > 0.0 && s(i) > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

// Orthonormal basis of the range of a Hermitian projection.
inline CMatrix projection_range(const CMatrix& p, double tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (p + p.adjoint()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1.0 - tol) keep.push_back(i);
  CMatrix q(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
  return q;
}

inline CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace qgraph

#endif  // QGRAPH_LINALG_HPP
