#pragma once

// Vectorization and product identities used throughout the coarray code.
// vec() stacks columns, matching Eigen's default column-major storage, so
// vec(a b^T) = b (x) a and vec(A X B) = (B^T (x) A) vec(X).

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coarray/types.hpp"

namespace coarray {

template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& m)
{
  using S = typename Derived::Scalar;
  Eigen::Matrix<S, Eigen::Dynamic, 1> out(m.size());
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

/// Inverse of vec(): reshape a length rows*cols vector column by column.
template <typename Derived>
auto mat(const Eigen::MatrixBase<Derived>& v, Index rows, Index cols)
{
  using S = typename Derived::Scalar;
  if (v.size() != rows * cols) throw std::invalid_argument("mat: size mismatch");
  Eigen::Matrix<S, Eigen::Dynamic, 1> tmp = v;
  return Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>(
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>(tmp.data(), rows, cols));
}

template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
  using S = typename Eigen::ScalarBinaryOpTraits<typename DA::Scalar, typename DB::Scalar>::ReturnType;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-wise Kronecker product.
template <typename DA, typename DB>
auto khatri_rao(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
  using S = typename Eigen::ScalarBinaryOpTraits<typename DA::Scalar, typename DB::Scalar>::ReturnType;
  if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column count mismatch");
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols());
  for (Index k = 0; k < a.cols(); ++k)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
  return out;
}

/// max |H - H^H|
template <typename Derived>
auto hermitian_error(const Eigen::MatrixBase<Derived>& h)
{
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// max |z_m - conj(z_{L-1-m})|; zero for conjugate-symmetric vectors.
template <typename Derived>
auto conj_symmetry_error(const Eigen::MatrixBase<Derived>& z)
{
  return (z - z.reverse().conjugate()).cwiseAbs().maxCoeff();
}

template <typename DA, typename DB>
auto relative_error(const Eigen::MatrixBase<DA>& actual, const Eigen::MatrixBase<DB>& expected)
{
  using R = typename Eigen::NumTraits<typename DA::Scalar>::Real;
  const R denom = expected.norm();
  const R diff = (actual - expected).norm();
  return denom > R(0) ? diff / denom : diff;
}

/// Moore-Penrose inverse of a full-column-rank matrix through a column-pivoted
/// QR least-squares solve. Throws when the numerical rank (relative threshold
/// on the R diagonal) falls short of the column count.
template <typename Derived>
auto pseudo_inverse(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-10)
{
  using S = typename Derived::Scalar;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  qr.setThreshold(rel_tol);
  if (qr.rank() < a.cols()) throw std::domain_error("pseudo_inverse: matrix is not full column rank");
  return Mat(qr.solve(Mat::Identity(a.rows(), a.rows())));
}

/// Real rank of a complex matrix viewed as a real-linear map, i.e. the rank of
/// [Re(A); Im(A)]. Singular values below rel_tol * sigma_max count as zero.
template <typename Scalar>
Index real_rank(const CMatrix<Scalar>& a, Scalar rel_tol, Scalar* condition = nullptr)
{
  RMatrix<Scalar> stacked(2 * a.rows(), a.cols());
  stacked << a.real(), a.imag();
  Eigen::JacobiSVD<RMatrix<Scalar>> svd(stacked);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  if (condition) *condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : Scalar(INFINITY);
  return rank;
}

/// Hermitian matrix function through the eigendecomposition: U f(L) U^H.
template <typename Scalar, typename Fn>
CMatrix<Scalar> hermitian_apply(const CMatrix<Scalar>& h, Fn&& fn)
{
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  RVector<Scalar> mapped = es.eigenvalues().unaryExpr(fn);
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace coarray
