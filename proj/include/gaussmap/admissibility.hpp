#pragma once

// Decision pipeline for a hypersurface pair (g, nu): candidate second
// fundamental form, h^2 = k, U = -(A^T)^{-1} h, isometry and parallelity.

#include <vector>

#include "gaussmap/gauss_data.hpp"
#include "gaussmap/report.hpp"
#include "gaussmap/riemann.hpp"

namespace gaussmap {

struct PipelineOptions {
  Tolerances tol;
  MethodChoice method = MethodChoice::automatic;
  int sign_branch = 1;  // +1: H >= 0 at the chart center, -1: flipped
};

enum class PositivityClass { positive, zero, negative, straddles };

struct PositivityResult {
  PositivityClass cls = PositivityClass::positive;
  TensorFieldd q;  // s + Tr_g k
  TensorFieldd H;  // sqrt(max(q, 0))
  double min_q = 0.0;
  double max_q = 0.0;
  double residual = 0.0;  // max(0, -min q) over the interior
  double threshold = 0.0;
};

/// Classifies q = s + Tr_g k over the interior against tau = C dx^2.
PositivityResult step1_positivity(const TensorFieldd& s, const TensorFieldd& k,
                                  const MetricField& g, const Tolerances& tol = {});

/// h = (Ric + k) / H. Throws RoutingError if H <= tau at some node.
TensorFieldd h_from_theorem2(const TensorFieldd& ricci, const TensorFieldd& k,
                             const TensorFieldd& H, double tau);

struct Theorem3Result {
  TensorFieldd h;         // rescaled, sign-continued, H >= 0 at the center
  TensorFieldd gap;       // sigma_last / sigma_second_last per node
  TensorFieldd residual;  // sigma_last / sigma_max per node
  double max_gap = 0.0;        // over the interior
  double max_residual = 0.0;   // over the interior
  double unique_fraction = 0.0;  // interior nodes with gap below the threshold
  Index no_solution_nodes = 0;   // interior nodes without a nullspace
  Index ambiguous_nodes = 0;     // interior nodes with a >= 2-dim nullspace
};

/// Solves h k^{-1} R(Omega) = 2 Omega h over a basis of so_g per node and
/// rescales so that Tr_g (h g^{-1} h) = Tr_g k. Requires m >= 3 and k
/// invertible; throws RoutingError otherwise.
Theorem3Result h_from_theorem3(const CurvaturePack& pack, const TensorFieldd& k,
                               const MetricField& g, const Tolerances& tol = {});

/// Positive semi-definite h with h g^{-1} h = k, computed in g-orthonormal
/// frames. Throws NotPsdError if k has an eigenvalue below -neg_tol.
TensorFieldd spd_sqrt(const TensorFieldd& k, const MetricField& g, double neg_tol = 0.0);
/// Same with g the identity.
TensorFieldd spd_sqrt(const TensorFieldd& k, double neg_tol = 0.0);

double check_h_squared(const TensorFieldd& h, const TensorFieldd& k, const MetricField& g,
                       int margin = 3);

/// U with A^T U = -h and columns in nu^perp. Throws DegenerateGaussMapError
/// where A^T restricted to nu^perp is singular.
TensorFieldd build_U(const GaussField& gauss, const TensorFieldd& h, double rank_tol = 1e-8);

double check_isometry(const TensorFieldd& U, const MetricField& g, int margin = 3);

/// `normals` has dims {n} (hypersurface) or {n, d} (orthonormal frame).
double check_parallel(const TensorFieldd& U, const TensorFieldd& christoffel,
                      const TensorFieldd& normals, int margin = 3);

struct MinimalResiduals {
  double gauss_condition = 0.0;  // max |s/2 + sqrt(det_g k)|
  double conformality = 0.0;     // angle + length defect of A in g-orthonormal frames
};

/// m = 2 only; throws RoutingError otherwise.
MinimalResiduals check_minimal_m2(const MetricField& g, const CurvaturePack& pack,
                                  const GaussField& gauss, int margin = 3);

/// max |(nabla_i h)_jk - (nabla_j h)_ik| / (1 + |dh| + |Gamma| |h|), per node.
double codazzi_residual(const TensorFieldd& h, const TensorFieldd& christoffel,
                        int margin = 3);

/// max |R_ijkl - (h_il h_jk - h_ik h_jl)| / (1 + |R|), per node.
double gauss_equation_residual(const CurvaturePack& pack, const TensorFieldd& h,
                               int margin = 3);

AdmissibilityReport run_pipeline(const MetricField& g, const GaussField& gauss,
                                 const PipelineOptions& options = {});

/// Negates h, H and U of a candidate.
void flip_sign(CandidateSolution& c);

}  // namespace gaussmap
