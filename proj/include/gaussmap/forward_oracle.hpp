#pragma once

// Ground-truth generator: closed-form immersions differentiated exactly
// (via jets) to give g, nu, h, k and H on a chart.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaussmap/chart.hpp"
#include "gaussmap/jet.hpp"
#include "gaussmap/riemann.hpp"

namespace gaussmap {

enum class SurfaceKind {
  plane,
  round_sphere,
  ellipsoid,
  graph,
  cylinder,
  catenoid,
  helicoid,
  associated_family,
  clifford_torus,
  hypersphere_m3,
  ellipsoid_m3,
};

std::string_view to_string(SurfaceKind k);
/// Accepts both dashed ("round-sphere") and underscored names.
std::optional<SurfaceKind> surface_from_string(std::string_view s);
std::vector<SurfaceKind> all_surfaces();

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::round_sphere;
  double radius = 1.0;              // round_sphere, cylinder, hypersphere_m3
  std::vector<double> axes;         // ellipsoid (3) / ellipsoid_m3 (4); empty = default
  std::vector<double> coeffs;       // graph z = a x^2 + b y^2 + c x y; empty = (1, 2, 0)
  double c = 1.0;                   // catenoid / helicoid / associated_family scale
  double theta = 0.0;               // associated_family angle
  double r1 = 1.0, r2 = 1.0;        // clifford_torus radii

  int m() const;
  int n() const;
  int codim() const { return n() - m(); }
  /// Axes with defaults filled in.
  std::vector<double> resolved_axes() const;
  std::vector<double> resolved_coeffs() const;
};

/// Parametrization u(x) and an orthonormal normal frame nu^alpha(x),
/// both evaluated on jets.
struct Parametrization {
  int m = 0;
  int n = 0;
  std::function<std::vector<Jetd>(const std::vector<Jetd>&)> position;
  std::function<std::vector<std::vector<Jetd>>(const std::vector<Jetd>&)> normals;
};

Parametrization make_surface(const SurfaceSpec& spec);

/// Chart of the given resolution over the surface's default window.
Chartd default_chart(const SurfaceSpec& spec, std::vector<int> shape);

/// Throws DomainError if the chart's box reaches a parametrization
/// singularity (sphere poles etc.) or the parameters are invalid.
void validate_window(const SurfaceSpec& spec, const Chartd& chart);

struct OracleData {
  SurfaceSpec spec;
  TensorFieldd u;                    // {n}
  TensorFieldd du;                   // {n, m}
  TensorFieldd frame;                // {n, d}, column alpha = nu^alpha
  TensorFieldd g;                    // {m, m}
  std::vector<TensorFieldd> dnu;     // d nu^alpha, {n, m}
  std::vector<TensorFieldd> h;       // h^alpha_ij = <u_ij, nu^alpha>
  std::vector<TensorFieldd> k_ab;    // k^{alpha beta} = (A^alpha)^T A^beta, row-major alpha*d+beta
  TensorFieldd k;                    // sum_alpha k^{alpha alpha}
  TensorFieldd H;                    // {d}, H^alpha = Tr_g h^alpha

  int m() const { return g.chart().dim(); }
  int n() const { return u.index_dims().front(); }
  int d() const { return frame.index_dims()[1]; }
  const Chartd& chart() const { return g.chart(); }

  /// Hypersurface views (d = 1).
  TensorFieldd nu() const;
  TensorFieldd mean_curvature() const;  // scalar field H
};

OracleData generate(const SurfaceSpec& spec, const Chartd& chart);

/// Member of the catenoid-helicoid associated family of scale c.
OracleData associated_family(double c, double theta, const Chartd& chart);

// Both are relative to the size of the terms at each node, as in
// codazzi_residual and gauss_equation_residual.
struct GaussCodazziResiduals {
  double gauss = 0.0;    // |R_ijkl - sum_a (h_il h_jk - h_ik h_jl)|
  double codazzi = 0.0;  // |(nabla_i h)_jk - (nabla_j h)_ik|, normal connection included
};

/// Both residuals over nodes `margin` layers inside the chart, using the
/// supplied h^alpha (so fabricated second forms can be probed).
GaussCodazziResiduals gauss_codazzi_residuals(const OracleData& data,
                                              const CurvaturePack& pack,
                                              const std::vector<TensorFieldd>& h,
                                              int margin = 3);
GaussCodazziResiduals gauss_codazzi_residuals(const OracleData& data,
                                              const CurvaturePack& pack, int margin = 3);

/// Rotates nu pointwise by R(x) acting in a fixed random 2-plane of R^n,
/// with angle eps * sin(w x_1 + p_1) cos(w x_2 + p_2). The result is still
/// unit length but (generically) no longer a Gauss map of an immersion
/// with metric g. Applies to {n} and {n, d} fields.
TensorFieldd perturb_gauss_map(const TensorFieldd& nu, double eps, std::uint64_t seed,
                               double frequency = 8.0);

}  // namespace gaussmap
