#pragma once

// Workflows behind the command-line tool. They are also called directly by
// the test suites, so everything the tool prints can be checked in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gaussmap/admissibility.hpp"
#include "gaussmap/codim.hpp"
#include "gaussmap/dataset.hpp"
#include "gaussmap/forward_oracle.hpp"
#include "gaussmap/reconstruct.hpp"

namespace gaussmap::cli {

enum ExitCode : int { kAdmissible = 0, kRejected = 1, kUsage = 2, kInapplicable = 3 };

int exit_code(Verdict v);

/// (g, nu) input dataset; `perturb` rotates the normals before writing.
Dataset forward_dataset(const OracleData& oracle, double perturb = 0.0,
                        std::uint64_t seed = 1);
/// Ground truth u, normals, h, k, H.
Dataset oracle_dataset(const OracleData& oracle);

struct CheckResult {
  AdmissibilityReport report;
  std::optional<MetricField> metric;
  std::optional<GaussField> gauss;         // hypersurface inputs
  std::optional<TensorFieldd> normals;     // {n} or {n, d}
  bool codim = false;
};

/// Routes to the hypersurface or general-codimension pipeline.
CheckResult check_dataset(const Dataset& ds, const PipelineOptions& options);

struct Reconstruction {
  Integration integration;
  ImmersionResiduals residuals;
};

/// Integrates the candidate of an admissible (or minimal-case) report.
std::optional<Reconstruction> reconstruct(const CheckResult& check, const Tolerances& tol,
                                          bool strict);

/// +1 or -1 such that sign * candidate matches the oracle's orientation.
int sign_against_oracle(const CheckResult& check, const OracleData& oracle);

struct RoundtripRow {
  std::string surface;
  std::vector<int> shape;
  double spacing = 0.0;
  Verdict verdict = Verdict::inapplicable;
  std::string method = "none";
  double max_residual = 0.0;   // largest gating residual / threshold
  std::optional<double> nullspace_gap;
  std::optional<double> reconstruction_error;  // interior, up to translation
  std::optional<double> order;                 // vs the previous (coarser) row
};

/// forward -> check -> reconstruct -> compare on `levels` grids, doubling
/// the point count per axis each level.
std::vector<RoundtripRow> roundtrip(const SurfaceSpec& spec, std::vector<int> shape, int levels,
                                    const PipelineOptions& options, double perturb = 0.0,
                                    std::uint64_t seed = 1);

/// Entry point of the command-line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gaussmap::cli
