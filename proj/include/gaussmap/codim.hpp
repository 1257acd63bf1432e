#pragma once

// General codimension: pairs (g, nu) with nu a field of (n - m)-planes.

#include <vector>

#include "gaussmap/admissibility.hpp"
#include "gaussmap/chart.hpp"
#include "gaussmap/report.hpp"
#include "gaussmap/riemann.hpp"

namespace gaussmap {

struct NormalFrame {
  TensorFieldd frame;           // {n, d}, orthonormal columns nu^alpha
  std::vector<TensorFieldd> A;  // tangential part of d nu^alpha, {n, m}

  int d() const { return frame.index_dims()[1]; }
  int n() const { return frame.index_dims()[0]; }
  int m() const { return frame.chart().dim(); }
  TensorFieldd normal(int alpha) const;  // {n}
};

/// Orthonormalizes spanning sets (dims {n, d}) node by node and rotates
/// each frame onto the center frame (orthogonal Procrustes), so the frame
/// is a smooth function of the plane. Throws InvalidGrassmannDataError on
/// rank deficiency.
NormalFrame build_normal_frame(const TensorFieldd& spanning);

struct CodimForms {
  int d = 0;
  std::vector<TensorFieldd> k_ab;  // alpha * d + beta
  TensorFieldd k;                  // sum_alpha k^{alpha alpha}

  const TensorFieldd& kab(int a, int b) const { return k_ab[a * d + b]; }
};

CodimForms third_forms(const NormalFrame& frame);

struct MeanCurvatureResult {
  TensorFieldd rho;                   // {d, d}
  std::vector<TensorFieldd> branches;  // H^alpha fields {d}, one per admissible branch
  double fixed_residual = 0.0;        // max over interior of min |lambda - 1|
  int fixed_dim = 0;                  // at the chart center
  Index no_fixed_nodes = 0;
  double threshold = 0.0;
};

/// rho_ab = Tr((Ric + k)^{-1} k^{ab}); H spans the fixed space of rho and
/// has length sqrt(s + Tr k). A one-dimensional fixed space yields one
/// branch (sign fixed at the center, continued by continuity). A
/// two-dimensional one is searched for directions satisfying
/// h^a h^b = k^{ab}; every distinct solution becomes a branch.
MeanCurvatureResult mean_curvature_vector(const CodimForms& forms, const CurvaturePack& pack,
                                          const MetricField& g, const NormalFrame& frame,
                                          const Tolerances& tol = {});

/// h^b = g sum_a H^a (Ric + k)^{-1} k^{ab}, symmetrized.
std::vector<TensorFieldd> second_forms(const CodimForms& forms, const TensorFieldd& H,
                                       const TensorFieldd& ricci, const MetricField& g);

/// max |h^a g^{-1} h^b - k^{ab}| / (1 + |k^{ab}|).
double h_alpha_products_residual(const std::vector<TensorFieldd>& h, const CodimForms& forms,
                                 const MetricField& g, int margin = 3);

struct CodimU {
  TensorFieldd U;
  int alpha = -1;  // the invertible A^alpha used, or -1 for the stacked solve
  double consistency = 0.0;  // max_a |(A^a)^T U + h^a| / (1 + |h^a|)
};

/// U = -((A^a)^T)^{-1} h^a for the first a with A^a invertible everywhere;
/// without one, U solves all equations (A^a)^T U = -h^a jointly in the
/// least-squares sense. Throws DegenerateGaussMapError if even the stacked
/// system is rank deficient.
CodimU build_U_codim(const NormalFrame& frame, const std::vector<TensorFieldd>& h,
                     double rank_tol = 1e-8, int margin = 3);

/// Codazzi residual including the normal connection of the frame, scaled
/// as codazzi_residual.
double codazzi_residual_codim(const std::vector<TensorFieldd>& h, const TensorFieldd& christoffel,
                              const NormalFrame& frame, int margin = 3);

/// max |R_ijkl - sum_a (h^a_il h^a_jk - h^a_ik h^a_jl)| / (1 + |R|), per node.
double gauss_equation_residual_codim(const CurvaturePack& pack,
                                     const std::vector<TensorFieldd>& h, int margin = 3);

AdmissibilityReport run_codim_pipeline(const MetricField& g, const TensorFieldd& spanning,
                                       const PipelineOptions& options = {});

}  // namespace gaussmap
