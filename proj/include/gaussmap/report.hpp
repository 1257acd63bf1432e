#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaussmap/chart.hpp"

namespace gaussmap {

/// Every residual threshold is scale * dx^2 with dx the largest spacing.
/// Residual maxima are taken over nodes at least `interior_margin` layers
/// from the boundary; three layers absorb the one-sided stencils of up to
/// three nested derivatives.
struct Tolerances {
  double scale = 50.0;
  int interior_margin = 3;
  double rank = 1e-8;           // relative singular value cutoff for d nu
  double nullspace_gap = 1e-6;  // floor for sigma_last / sigma_second_last
  double unit_eigenvalue = 1e-6;  // floor for |lambda - 1| of rho

  double threshold(const Chartd& chart) const {
    const double h = chart.max_spacing();
    return scale * h * h;
  }
  /// Gap and eigenvalue cutoffs cannot be tighter than the discretization
  /// noise of the curvature they are computed from.
  double gap_threshold(const Chartd& chart) const {
    return std::max(nullspace_gap, threshold(chart));
  }
  double eigenvalue_threshold(const Chartd& chart) const {
    return std::max(unit_eigenvalue, threshold(chart));
  }
};

enum class Verdict { admissible, rejected, inapplicable };
enum class Method { theorem2, theorem3, spd_sqrt, minimal_m2, codim_fixed_vector };
enum class MethodChoice { automatic, theorem2, theorem3, sqrt };
enum class Step { step1, step2, step3, step4, minimal_case };

std::string_view to_string(Verdict v);
std::string_view to_string(Method m);
std::string_view to_string(MethodChoice m);
std::string_view to_string(Step s);
std::optional<Verdict> verdict_from_string(std::string_view s);
std::optional<Method> method_from_string(std::string_view s);
std::optional<MethodChoice> method_choice_from_string(std::string_view s);
std::optional<Step> step_from_string(std::string_view s);

struct Residual {
  double value = 0.0;
  double threshold = 0.0;
  bool gating = true;  // participates in the verdict

  bool passes() const { return value <= threshold; }
};

/// Keys every report carries (absent residuals are written as n/a).
inline const std::vector<std::string>& residual_keys() {
  static const std::vector<std::string> keys = {
      "step1_positivity", "h_squared",       "isometry",        "parallelity",
      "gauss_condition_m2", "conformality_m2", "nullspace_gap",  "codazzi",
      "gauss_equation",   "rho_fixed_vector", "h_alpha_products", "a_alpha_consistency"};
  return keys;
}

struct CandidateSolution {
  TensorFieldd h;  // second fundamental form, dims {m, m}
  TensorFieldd H;  // Tr_g h
  TensorFieldd U;  // dims {n, m}, column j = u_j
  Method method = Method::theorem2;
  int sign_branch = 1;
};

/// General-codimension solution in a continuous orthonormal normal frame.
struct CodimSolution {
  TensorFieldd frame;          // dims {n, d}
  std::vector<TensorFieldd> h;  // h^alpha, dims {m, m}
  TensorFieldd H;              // H^alpha, dims {d}
  TensorFieldd U;              // dims {n, m}
  int sign_branch = 1;
  int branch = 0;         // index among the admissible branches
  int branch_count = 1;   // number of admissible branches found
};

struct AdmissibilityReport {
  Verdict verdict = Verdict::inapplicable;
  std::optional<Step> failed_step;
  std::map<std::string, Residual> residuals;
  std::optional<CandidateSolution> candidate;
  std::optional<CodimSolution> codim;
  std::vector<CodimSolution> other_branches;  // further admissible codim branches
  std::vector<std::string> notes;
  std::vector<std::string> warnings;
  double threshold = 0.0;

  /// Tangent map du = U of the reconstructed immersion, if any.
  const TensorFieldd* tangent_map() const {
    if (candidate) return &candidate->U;
    if (codim) return &codim->U;
    return nullptr;
  }

  bool has(const std::string& key) const { return residuals.count(key) != 0; }
  double value(const std::string& key) const { return residuals.at(key).value; }
};

}  // namespace gaussmap
