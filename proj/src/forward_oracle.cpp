#include "gaussmap/forward_oracle.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "gaussmap/linalg.hpp"

namespace gaussmap {

namespace {

using JetVec = std::vector<Jetd>;

struct Window {
  std::vector<double> lo, hi;
};

struct NameEntry {
  SurfaceKind kind;
  std::string_view name;
};

constexpr std::array<NameEntry, 11> kNames = {{
    {SurfaceKind::plane, "plane"},
    {SurfaceKind::round_sphere, "round-sphere"},
    {SurfaceKind::ellipsoid, "ellipsoid"},
    {SurfaceKind::graph, "graph"},
    {SurfaceKind::cylinder, "cylinder"},
    {SurfaceKind::catenoid, "catenoid"},
    {SurfaceKind::helicoid, "helicoid"},
    {SurfaceKind::associated_family, "associated-family"},
    {SurfaceKind::clifford_torus, "clifford-torus"},
    {SurfaceKind::hypersphere_m3, "hypersphere-m3"},
    {SurfaceKind::ellipsoid_m3, "ellipsoid-m3"},
}};

Window default_window(const SurfaceSpec& spec) {
  switch (spec.kind) {
    case SurfaceKind::plane: return {{-1.0, -1.0}, {1.0, 1.0}};
    case SurfaceKind::graph: return {{-0.6, -0.6}, {0.6, 0.6}};
    case SurfaceKind::round_sphere:
    case SurfaceKind::ellipsoid: return {{0.7, 0.2}, {2.3, 1.8}};
    case SurfaceKind::cylinder: return {{0.0, -0.8}, {1.6, 0.8}};
    case SurfaceKind::catenoid:
    case SurfaceKind::helicoid:
    case SurfaceKind::associated_family: return {{0.2, -0.8}, {1.8, 0.8}};
    case SurfaceKind::clifford_torus: return {{0.2, 0.2}, {1.8, 1.8}};
    case SurfaceKind::hypersphere_m3:
    case SurfaceKind::ellipsoid_m3: return {{1.0, 1.0, 0.3}, {2.0, 2.0, 1.3}};
  }
  throw ConfigurationError("unknown surface");
}

double family_angle(const SurfaceSpec& spec) {
  switch (spec.kind) {
    case SurfaceKind::catenoid: return 0.0;
    case SurfaceKind::helicoid: return 0.5 * std::numbers::pi;
    default: return spec.theta;
  }
}

JetVec normalized(JetVec v) {
  Jetd s = v[0] * v[0];
  for (std::size_t i = 1; i < v.size(); ++i) s += v[i] * v[i];
  const Jetd inv = 1.0 / sqrt(s);
  for (auto& x : v) x *= inv;
  return v;
}

/// (a cos t, b sin t cos s, c sin t sin s ...) style hyperspherical
/// coordinates scaled per axis, with outward normal grad(sum x_i^2/a_i^2).
Parametrization quadric(std::vector<double> axes) {
  Parametrization p;
  p.n = static_cast<int>(axes.size());
  p.m = p.n - 1;
  p.position = [axes](const JetVec& x) {
    const int m = static_cast<int>(x.size());
    JetVec dir(m + 1);
    if (m == 2) {
      // (sin th cos ph, sin th sin ph, cos th)
      dir[0] = sin(x[0]) * cos(x[1]);
      dir[1] = sin(x[0]) * sin(x[1]);
      dir[2] = cos(x[0]);
    } else {
      // (cos psi, sin psi cos th, sin psi sin th cos ph, sin psi sin th sin ph)
      dir[0] = cos(x[0]);
      dir[1] = sin(x[0]) * cos(x[1]);
      dir[2] = sin(x[0]) * sin(x[1]) * cos(x[2]);
      dir[3] = sin(x[0]) * sin(x[1]) * sin(x[2]);
    }
    for (int i = 0; i <= m; ++i) dir[i] *= axes[i];
    return dir;
  };
  p.normals = [axes, pos = p.position](const JetVec& x) {
    JetVec u = pos(x);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] /= axes[i] * axes[i];
    return std::vector<JetVec>{normalized(u)};
  };
  return p;
}

}  // namespace

std::string_view to_string(SurfaceKind k) {
  for (const auto& e : kNames)
    if (e.kind == k) return e.name;
  return "unknown";
}

std::optional<SurfaceKind> surface_from_string(std::string_view s) {
  std::string t(s);
  for (auto& ch : t)
    if (ch == '_') ch = '-';
  for (const auto& e : kNames)
    if (e.name == t) return e.kind;
  return std::nullopt;
}

std::vector<SurfaceKind> all_surfaces() {
  std::vector<SurfaceKind> out;
  for (const auto& e : kNames) out.push_back(e.kind);
  return out;
}

int SurfaceSpec::m() const {
  return (kind == SurfaceKind::hypersphere_m3 || kind == SurfaceKind::ellipsoid_m3) ? 3 : 2;
}

int SurfaceSpec::n() const {
  switch (kind) {
    case SurfaceKind::clifford_torus:
    case SurfaceKind::hypersphere_m3:
    case SurfaceKind::ellipsoid_m3: return 4;
    default: return 3;
  }
}

std::vector<double> SurfaceSpec::resolved_axes() const {
  switch (kind) {
    case SurfaceKind::round_sphere: return {radius, radius, radius};
    case SurfaceKind::hypersphere_m3: return {radius, radius, radius, radius};
    case SurfaceKind::ellipsoid: return axes.empty() ? std::vector<double>{1.0, 1.5, 2.0} : axes;
    case SurfaceKind::ellipsoid_m3:
      return axes.empty() ? std::vector<double>{1.0, 1.3, 1.6, 2.0} : axes;
    default: return axes;
  }
}

std::vector<double> SurfaceSpec::resolved_coeffs() const {
  return coeffs.empty() ? std::vector<double>{1.0, 2.0, 0.0} : coeffs;
}

Parametrization make_surface(const SurfaceSpec& spec) {
  Parametrization p;
  p.m = spec.m();
  p.n = spec.n();
  switch (spec.kind) {
    case SurfaceKind::plane:
      p.position = [](const JetVec& x) { return JetVec{x[0], x[1], Jetd(0.0, 2)}; };
      p.normals = [](const JetVec&) {
        return std::vector<JetVec>{{Jetd(0.0, 2), Jetd(0.0, 2), Jetd(1.0, 2)}};
      };
      return p;
    case SurfaceKind::round_sphere:
    case SurfaceKind::ellipsoid:
    case SurfaceKind::hypersphere_m3:
    case SurfaceKind::ellipsoid_m3: {
      const auto axes = spec.resolved_axes();
      if (static_cast<int>(axes.size()) != p.n)
        throw ConfigurationError(std::string(to_string(spec.kind)) + " needs " +
                                 std::to_string(p.n) + " axes");
      return quadric(axes);
    }
    case SurfaceKind::graph: {
      const auto c = spec.resolved_coeffs();
      if (c.size() != 3) throw ConfigurationError("graph needs 3 coefficients a,b,c");
      p.position = [c](const JetVec& x) {
        return JetVec{x[0], x[1], c[0] * x[0] * x[0] + c[1] * x[1] * x[1] + c[2] * x[0] * x[1]};
      };
      p.normals = [c](const JetVec& x) {
        const Jetd fx = 2.0 * c[0] * x[0] + c[2] * x[1];
        const Jetd fy = 2.0 * c[1] * x[1] + c[2] * x[0];
        return std::vector<JetVec>{normalized({-fx, -fy, Jetd(1.0, 2)})};
      };
      return p;
    }
    case SurfaceKind::cylinder: {
      const double r = spec.radius;
      p.position = [r](const JetVec& x) { return JetVec{r * cos(x[0]), r * sin(x[0]), x[1]}; };
      p.normals = [](const JetVec& x) {
        return std::vector<JetVec>{{cos(x[0]), sin(x[0]), Jetd(0.0, 2)}};
      };
      return p;
    }
    case SurfaceKind::catenoid:
    case SurfaceKind::helicoid:
    case SurfaceKind::associated_family: {
      const double c = spec.c;
      const double ct = std::cos(family_angle(spec));
      const double st = std::sin(family_angle(spec));
      p.position = [c, ct, st](const JetVec& x) {
        const Jetd& u = x[0];
        const Jetd& v = x[1];
        return JetVec{c * (ct * cosh(v) * cos(u) + st * sinh(v) * sin(u)),
                      c * (ct * cosh(v) * sin(u) - st * sinh(v) * cos(u)),
                      c * (ct * v + st * u)};
      };
      p.normals = [](const JetVec& x) {
        const Jetd& u = x[0];
        const Jetd& v = x[1];
        return std::vector<JetVec>{{cos(u) / cosh(v), sin(u) / cosh(v), -tanh(v)}};
      };
      return p;
    }
    case SurfaceKind::clifford_torus: {
      const double r1 = spec.r1, r2 = spec.r2;
      p.position = [r1, r2](const JetVec& x) {
        return JetVec{r1 * cos(x[0]), r1 * sin(x[0]), r2 * cos(x[1]), r2 * sin(x[1])};
      };
      p.normals = [](const JetVec& x) {
        const Jetd zero(0.0, 2);
        return std::vector<JetVec>{{cos(x[0]), sin(x[0]), zero, zero},
                                   {zero, zero, cos(x[1]), sin(x[1])}};
      };
      return p;
    }
  }
  throw ConfigurationError("unknown surface");
}

Chartd default_chart(const SurfaceSpec& spec, std::vector<int> shape) {
  const Window w = default_window(spec);
  const int m = spec.m();
  if (static_cast<int>(shape.size()) != m)
    throw ConfigurationError(std::string(to_string(spec.kind)) + " needs a " +
                             std::to_string(m) + "-dimensional grid");
  std::vector<double> spacing(m);
  for (int a = 0; a < m; ++a) {
    if (shape[a] < 2) throw ConfigurationError("grid too small");
    spacing[a] = (w.hi[a] - w.lo[a]) / (shape[a] - 1);
  }
  return build_chart<double>(m, std::move(shape), std::move(spacing), w.lo);
}

void validate_window(const SurfaceSpec& spec, const Chartd& chart) {
  const std::string name(to_string(spec.kind));
  if (chart.dim() != spec.m())
    throw DomainError(name + " is " + std::to_string(spec.m()) + "-dimensional but the chart is " +
                      std::to_string(chart.dim()) + "-dimensional");
  auto lo = [&](int a) { return chart.origin()[a]; };
  auto hi = [&](int a) { return chart.origin()[a] + chart.spacing(a) * (chart.shape(a) - 1); };
  // sin of a polar angle must stay away from zero
  auto polar = [&](int a) {
    constexpr double kMargin = 1e-3;
    if (lo(a) < kMargin || hi(a) > std::numbers::pi - kMargin)
      throw DomainError(name + ": polar coordinate on axis " + std::to_string(a) +
                        " must stay inside (0, pi) to avoid the poles");
  };
  auto positive = [&](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(name + ": " + what + " must be positive");
  };
  switch (spec.kind) {
    case SurfaceKind::round_sphere:
    case SurfaceKind::ellipsoid:
      for (double a : spec.resolved_axes()) positive(a, "axes/radius");
      polar(0);
      break;
    case SurfaceKind::hypersphere_m3:
    case SurfaceKind::ellipsoid_m3:
      for (double a : spec.resolved_axes()) positive(a, "axes/radius");
      polar(0);
      polar(1);
      break;
    case SurfaceKind::cylinder: positive(spec.radius, "radius"); break;
    case SurfaceKind::catenoid:
    case SurfaceKind::helicoid:
    case SurfaceKind::associated_family: positive(spec.c, "c"); break;
    case SurfaceKind::clifford_torus:
      positive(spec.r1, "r1");
      positive(spec.r2, "r2");
      break;
    case SurfaceKind::plane:
    case SurfaceKind::graph: break;
  }
}

TensorFieldd OracleData::nu() const {
  if (d() != 1) throw ConfigurationError("nu() is only defined for hypersurfaces");
  TensorFieldd out(chart(), {n()}, Valence{0, 0, 1}, n());
  out.values() = frame.values();
  return out;
}

TensorFieldd OracleData::mean_curvature() const {
  TensorFieldd out(chart(), {}, Valence{});
  out.values() = H.values().col(0);
  return out;
}

OracleData generate(const SurfaceSpec& spec, const Chartd& chart) {
  validate_window(spec, chart);
  const Parametrization par = make_surface(spec);
  const int m = par.m, n = par.n, d = n - m;

  OracleData o;
  o.spec = spec;
  o.u = TensorFieldd(chart, {n}, Valence{0, 0, 1}, n);
  o.du = TensorFieldd(chart, {n, m}, Valence{1, 0, 1}, n);
  o.frame = TensorFieldd(chart, {n, d}, Valence{0, 0, 2}, n);
  o.g = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  o.k = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  o.H = TensorFieldd(chart, {d}, Valence{0, 0, 1}, n);
  for (int a = 0; a < d; ++a) {
    o.dnu.emplace_back(chart, std::vector<int>{n, m}, Valence{1, 0, 1}, n);
    o.h.emplace_back(chart, std::vector<int>{m, m}, Valence{2, 0, 0});
  }
  for (int a = 0; a < d * d; ++a) o.k_ab.emplace_back(chart, std::vector<int>{m, m}, Valence{2, 0, 0});

  JetVec x(m);
  for (Index p = 0; p < chart.nodes(); ++p) {
    for (int i = 0; i < m; ++i) x[i] = Jetd::variable(chart.coordinate(p, i), i, m);
    const JetVec u = par.position(x);
    const std::vector<JetVec> nus = par.normals(x);

    Eigen::MatrixXd du(n, m);
    for (int c = 0; c < n; ++c) {
      o.u.values()(p, c) = u[c].v;
      du.row(c) = u[c].g.transpose();
    }
    o.du.matrix(p) = du;
    const Eigen::MatrixXd g = symmetrized(du.transpose() * du);
    o.g.matrix(p) = g;
    const Eigen::MatrixXd ginv = g.inverse();

    Eigen::MatrixXd frame(n, d);
    std::vector<Eigen::MatrixXd> dnu(d, Eigen::MatrixXd(n, m));
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < n; ++c) {
        frame(c, a) = nus[a][c].v;
        dnu[a].row(c) = nus[a][c].g.transpose();
      }
    o.frame.matrix(p) = frame;

    std::vector<Eigen::MatrixXd> tangential(d);
    for (int a = 0; a < d; ++a) {
      o.dnu[a].matrix(p) = dnu[a];
      tangential[a] = dnu[a] - frame * (frame.transpose() * dnu[a]);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
      for (int c = 0; c < n; ++c) h += frame(c, a) * u[c].h;
      h = symmetrized(h);
      o.h[a].matrix(p) = h;
      o.H.values()(p, a) = (ginv.cwiseProduct(h)).sum();
    }
    Eigen::MatrixXd ksum = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const Eigen::MatrixXd kab = tangential[a].transpose() * tangential[b];
        o.k_ab[a * d + b].matrix(p) = kab;
        if (a == b) ksum += kab;
      }
    o.k.matrix(p) = symmetrized(ksum);
  }
  return o;
}

OracleData associated_family(double c, double theta, const Chartd& chart) {
  SurfaceSpec spec;
  spec.kind = SurfaceKind::associated_family;
  spec.c = c;
  spec.theta = theta;
  return generate(spec, chart);
}

GaussCodazziResiduals gauss_codazzi_residuals(const OracleData& data,
                                              const CurvaturePack& pack,
                                              const std::vector<TensorFieldd>& h,
                                              int margin) {
  const Chartd& chart = data.chart();
  const int m = data.m(), d = data.d();
  if (static_cast<int>(h.size()) != d)
    throw ConfigurationError("one second fundamental form per normal is required");
  std::vector<TensorFieldd> dh;
  for (const auto& ha : h) dh.push_back(gradient(ha));  // (j, k, i) = d_i h_jk
  auto r4 = [m](int i, int j, int k, int l) { return ((i * m + j) * m + k) * m + l; };
  auto r3 = [m](int k, int i, int j) { return (k * m + i) * m + j; };

  GaussCodazziResiduals out;
  out.gauss = max_over_interior(chart, margin, [&](Index p) {
    const auto R = pack.riemann_low.node(p);
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            double rhs = 0.0;
            for (int a = 0; a < d; ++a) {
              const auto ha = h[a].matrix(p);
              rhs += ha(i, l) * ha(j, k) - ha(i, k) * ha(j, l);
            }
            worst = std::max(worst, std::abs(R(r4(i, j, k, l)) - rhs));
          }
    return worst / (1.0 + R.cwiseAbs().maxCoeff());
  });
  out.codazzi = max_over_interior(chart, margin, [&](Index p) {
    const auto G = pack.christoffel.node(p);
    const Eigen::MatrixXd frame = data.frame.matrix(p);
    // omega[a](b, i) = <d_i nu^b, nu^a>
    std::vector<Eigen::MatrixXd> omega(d, Eigen::MatrixXd::Zero(d, m));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        omega[a].row(b) = frame.col(a).transpose() * Eigen::MatrixXd(data.dnu[b].matrix(p));
    auto nabla = [&](int a, int i, int j, int k) {
      const auto ha = h[a].matrix(p);
      double v = dh[a].values()(p, (j * m + k) * m + i);
      for (int l = 0; l < m; ++l)
        v -= G(r3(l, i, j)) * ha(l, k) + G(r3(l, i, k)) * ha(j, l);
      for (int b = 0; b < d; ++b) v += omega[a](b, i) * h[b].matrix(p)(j, k);
      return v;
    };
    double worst = 0.0;
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k)
            worst = std::max(worst, std::abs(nabla(a, i, j, k) - nabla(a, j, i, k)));
    double dh_max = 0.0, h_max = 0.0;
    for (int a = 0; a < d; ++a) {
      dh_max = std::max(dh_max, dh[a].node(p).cwiseAbs().maxCoeff());
      h_max = std::max(h_max, h[a].node(p).cwiseAbs().maxCoeff());
    }
    return worst / (1.0 + dh_max + G.cwiseAbs().maxCoeff() * h_max);
  });
  return out;
}

GaussCodazziResiduals gauss_codazzi_residuals(const OracleData& data,
                                              const CurvaturePack& pack, int margin) {
  return gauss_codazzi_residuals(data, pack, data.h, margin);
}

TensorFieldd perturb_gauss_map(const TensorFieldd& nu, double eps, std::uint64_t seed,
                               double frequency) {
  const Chartd& chart = nu.chart();
  const int n = nu.index_dims().front();
  if (chart.dim() < 2 || n < 2) throw ConfigurationError("perturbation needs m >= 2 and n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXd a(n), b(n);
  for (int i = 0; i < n; ++i) a(i) = normal(rng);
  for (int i = 0; i < n; ++i) b(i) = normal(rng);
  a.normalize();
  b -= a * a.dot(b);
  b.normalize();
  const double p1 = phase(rng), p2 = phase(rng);
  const Eigen::MatrixXd rot_gen = b * a.transpose() - a * b.transpose();
  const Eigen::MatrixXd proj = a * a.transpose() + b * b.transpose();

  TensorFieldd out = nu;
  for (Index p = 0; p < chart.nodes(); ++p) {
    const double x1 = chart.coordinate(p, 0), x2 = chart.coordinate(p, 1);
    const double t = eps * std::sin(frequency * x1 + p1) * std::cos(frequency * x2 + p2);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n) + std::sin(t) * rot_gen +
                              (std::cos(t) - 1.0) * proj;
    out.matrix(p) = r * Eigen::MatrixXd(nu.matrix(p));
  }
  return out;
}

}  // namespace gaussmap
