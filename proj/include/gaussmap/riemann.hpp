#pragma once

// Intrinsic curvature of a sampled metric.
//
// Conventions (all index orders are the storage order of the field):
//   christoffel      Gamma^k_ij            dims {m, m, m}  (k, i, j)
//   riemann_up       R^l_ijk               dims {m, m, m, m}  (l, i, j, k)
//   riemann_low      R_ijkl = g_lp R^p_ijk
//   ricci            Ric_jk = R^l_ljk
//   scalar           s = g^jk Ric_jk
// with R(e_i, e_j) e_k = R^l_ijk e_l and R(X,Y) = [nabla_X, nabla_Y] -
// nabla_[X,Y]. With this choice the unit sphere has R_ijkl = g_il g_jk -
// g_ik g_jl, i.e. R_ijkl = h_il h_jk - h_ik h_jl holds for hypersurfaces,
// and Ric = hH - k.

#include <Eigen/Dense>

#include "gaussmap/chart.hpp"

namespace gaussmap {

/// Symmetric positive definite metric field with cached inverse.
class MetricField {
 public:
  MetricField() = default;
  /// `g` must have index_dims {m, m}. Symmetrizes entries that differ by
  /// rounding; throws SingularMetricError where g is not positive definite.
  explicit MetricField(TensorFieldd g);

  const TensorFieldd& g() const { return g_; }
  const TensorFieldd& inverse() const { return g_inv_; }
  const Chartd& chart() const { return g_.chart(); }
  int dim() const { return g_.chart().dim(); }

  Eigen::MatrixXd at(Index p) const { return g_.matrix(p); }
  Eigen::MatrixXd inverse_at(Index p) const { return g_inv_.matrix(p); }
  /// Lower Cholesky factor L with g = L L^T.
  Eigen::MatrixXd cholesky_at(Index p) const;

 private:
  TensorFieldd g_;
  TensorFieldd g_inv_;
};

struct CurvaturePack {
  TensorFieldd christoffel;
  TensorFieldd riemann_up;
  TensorFieldd riemann_low;
  TensorFieldd ricci;
  TensorFieldd scalar;
};

TensorFieldd christoffel(const MetricField& g);

CurvaturePack riemann_tensor(const MetricField& g, const TensorFieldd& christoffel);

/// christoffel() followed by riemann_tensor().
CurvaturePack curvature(const MetricField& g);

/// Ricci contracted in the other slot, g^jk R_ijkl. Agrees with
/// pack.ricci up to discretization error.
TensorFieldd ricci_from_lowered(const CurvaturePack& pack, const MetricField& g);

/// b^i_j = g^ik b_kj.
TensorFieldd raise(const MetricField& g, const TensorFieldd& b);
/// b_ij = g_ik b^k_j.
TensorFieldd lower(const MetricField& g, const TensorFieldd& b);

/// Curvature operator on g-antisymmetric endomorphisms at one node,
/// normalized so that a hypersurface satisfies R(Omega) = 2 h Omega h with
/// h the shape operator. `omega` is the operator Omega^i_j; throws
/// DomainError when Omega^T g + g Omega is not ~0.
Eigen::MatrixXd curvature_operator_at(const CurvaturePack& pack, const MetricField& g,
                                      Index node, const Eigen::MatrixXd& omega,
                                      double antisymmetry_tol = 1e-9);

/// Same at R_low given in a g-orthonormal frame (metric = identity);
/// `r_on` is m^2 x m^2 with entry (a*m+b, c*m+d) = R_abcd.
Eigen::MatrixXd curvature_operator_orthonormal(const Eigen::MatrixXd& r_on,
                                               const Eigen::MatrixXd& omega);

/// Field version of curvature_operator_at; `omega` has dims {m, m}.
TensorFieldd curvature_operator(const CurvaturePack& pack, const MetricField& g,
                                const TensorFieldd& omega, double antisymmetry_tol = 1e-9);

/// R_abcd expressed in the g-orthonormal frame P = L^{-T} at a node.
Eigen::MatrixXd riemann_orthonormal_at(const CurvaturePack& pack, const MetricField& g,
                                       Index node);

}  // namespace gaussmap
