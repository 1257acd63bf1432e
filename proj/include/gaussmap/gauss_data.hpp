#pragma once

#include <Eigen/Dense>

#include "gaussmap/chart.hpp"
#include "gaussmap/riemann.hpp"

namespace gaussmap {

/// Unit normal field nu (dims {n}), its differential A = d nu (dims {n, m},
/// column j = d_j nu) and the third fundamental form k = A^T A.
struct GaussField {
  TensorFieldd nu;
  TensorFieldd A;
  TensorFieldd k;

  int m() const { return nu.chart().dim(); }
  int n() const { return nu.index_dims().front(); }
};

/// Deviation of |nu| from 1 below which samples are silently renormalized.
inline constexpr double kUnitRenormalizeTolerance = 1e-6;

/// Throws InvalidGaussMapError if |nu| is off by >= 1e-6 anywhere,
/// SamplingError on NaN/Inf, ConfigurationError if n != m + 1.
GaussField build_gauss_field(const TensorFieldd& nu_samples);

struct DegeneracyReport {
  TensorFieldd singular_values;  // dims {m}, descending, g-orthonormal frames
  std::vector<int> rank;         // per node
  int min_rank = 0;
  double min_ratio = 0.0;        // min over nodes of sigma_min / sigma_max
  bool invertible = false;
  Index worst_node = 0;
};

/// Singular values of A measured in g-orthonormal frames. A node counts as
/// rank-deficient when sigma_min <= rank_tol * sigma_max at that node.
DegeneracyReport degeneracy_report(const GaussField& gauss, const MetricField& g,
                                   double rank_tol = 1e-8);

/// w - <w, nu> nu per node; w has dims {n} or {n, c} (applied column-wise).
TensorFieldd project_normal_complement(const GaussField& gauss, const TensorFieldd& w);

}  // namespace gaussmap
