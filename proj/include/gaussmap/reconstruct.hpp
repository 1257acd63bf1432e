#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaussmap/chart.hpp"
#include "gaussmap/report.hpp"
#include "gaussmap/riemann.hpp"

namespace gaussmap {

struct Immersion {
  TensorFieldd u;  // {n}
  Index base_point = 0;
  Eigen::VectorXd base_value;
};

struct Integration {
  Immersion immersion;
  double integrability = 0.0;  // see integrability_residual
  double threshold = 0.0;
  std::vector<std::string> warnings;
};

/// Mixed-partials residual of a tangent map U (dims {n, m}):
/// max |d_i u_j - d_j u_i| / (1 + |dU|) per node, over the interior.
double integrability_residual(const TensorFieldd& U, int margin = 3);

/// Integrates du = U with the composite trapezoid rule along the
/// axis-ordered staircase from `base` (default: chart center). With
/// `strict` a residual above tau throws NonIntegrableError; otherwise it
/// is reported as a warning.
Integration integrate(const TensorFieldd& U, std::optional<Index> base = std::nullopt,
                      std::optional<Eigen::VectorXd> base_value = std::nullopt,
                      const Tolerances& tol = {}, bool strict = true);

struct ImmersionResiduals {
  double metric = 0.0;  // max |du^T du - g| / (1 + |g|)
  double normal = 0.0;  // max |N^T du|, N the normal frame
};

/// `normals` has dims {n} or {n, d}.
ImmersionResiduals verify_immersion(const Immersion& imm, const MetricField& g,
                                    const TensorFieldd& normals, int margin = 3);

/// h_ij = <u_ij, nu> by finite differences of u.
TensorFieldd second_fundamental_form(const Immersion& imm, const TensorFieldd& nu);

/// max |(a - b) - mean(a - b)| over `nodes` (all nodes by default).
double compare_up_to_translation(const TensorFieldd& a, const TensorFieldd& b,
                                 const std::vector<Index>* nodes = nullptr);
double compare_up_to_translation(const Immersion& a, const Immersion& b,
                                 const std::vector<Index>* nodes = nullptr);

}  // namespace gaussmap
