#pragma once

// Small dense kernels evaluated once per grid node.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "gaussmap/errors.hpp"

namespace gaussmap {

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(0.5) * (m + m.transpose())).eval();
}

/// Unique positive semi-definite square root. Eigenvalues in
/// [-neg_tol, 0) are clamped to zero; anything below -neg_tol throws.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
psd_sqrt(const Eigen::MatrixBase<Derived>& k,
         typename Derived::Scalar neg_tol = typename Derived::Scalar(0),
         std::int64_t node = -1) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(k));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lam = eig.eigenvalues();
  if (lam.minCoeff() < -neg_tol)
    throw NotPsdError("matrix has eigenvalue " + std::to_string(double(lam.minCoeff())) +
                          " below -tolerance",
                      node);
  lam = lam.cwiseMax(Scalar(0)).cwiseSqrt();
  const Mat& q = eig.eigenvectors();
  return symmetrized(q * lam.asDiagonal() * q.transpose());
}

/// Orthogonal polar factor of a square matrix (closest rotation/reflection).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
polar_factor(const Eigen::MatrixBase<Derived>& m) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<Mat> svd(m.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Orthonormal basis (n x (n-d)) of the orthogonal complement of the
/// column span of `frame` (n x d, orthonormal columns).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
complement_basis(const Eigen::MatrixBase<Derived>& frame) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = frame.rows();
  const Eigen::Index d = frame.cols();
  Eigen::HouseholderQR<Mat> qr(frame.eval());
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - d);
}

/// Frame in which `g` becomes the identity: P = L^{-T} with g = L L^T,
/// so P^T g P = I. Returns false if g is not positive definite.
template <typename Derived, typename Out>
bool orthonormal_frame(const Eigen::MatrixBase<Derived>& g,
                       Eigen::MatrixBase<Out>& lower_factor) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Mat> llt(g.eval());
  if (llt.info() != Eigen::Success) return false;
  lower_factor = llt.matrixL();
  return true;
}

template <typename Scalar>
struct NullspaceResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> singular_values;  // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;  // last right singular vector
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> second;  // second-to-last one
  Scalar gap = Scalar(0);         // sigma_last / sigma_second_last
  Scalar second_ratio = Scalar(0);  // sigma_second_last / sigma_max
};

/// SVD-based probe of the near-nullspace of a tall matrix.
template <typename Derived>
NullspaceResult<typename Derived::Scalar> smallest_singular_pair(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<Mat> svd(a.eval(), Eigen::ComputeFullV);
  NullspaceResult<Scalar> r;
  r.singular_values = svd.singularValues();
  const Eigen::Index c = a.cols();
  r.vector = svd.matrixV().col(c - 1);
  if (c >= 2) r.second = svd.matrixV().col(c - 2);
  const Scalar smax = r.singular_values(0);
  const Scalar slast = r.singular_values(c - 1);
  const Scalar ssecond = c >= 2 ? r.singular_values(c - 2) : smax;
  r.gap = ssecond > Scalar(0) ? slast / ssecond : Scalar(1);
  r.second_ratio = smax > Scalar(0) ? ssecond / smax : Scalar(0);
  return r;
}

}  // namespace gaussmap
