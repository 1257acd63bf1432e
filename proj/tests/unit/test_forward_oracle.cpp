#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gaussmap/forward_oracle.hpp"
#include "gaussmap/gauss_data.hpp"
#include "gaussmap/jet.hpp"
#include "gaussmap/reconstruct.hpp"

using namespace gaussmap;

namespace {

constexpr double kC = 50.0;

double tau(const Chartd& c) { return kC * std::pow(c.max_spacing(), 2); }

std::vector<int> grid(const SurfaceSpec& s, int n) {
  return std::vector<int>(static_cast<std::size_t>(s.m()), n);
}

OracleData oracle(SurfaceKind kind, int n = 32) {
  SurfaceSpec spec;
  spec.kind = kind;
  return generate(spec, default_chart(spec, grid(spec, n)));
}

double max_abs(const TensorFieldd& f) { return f.values().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("jets differentiate to second order exactly") {
  // f(x, y) = sin(x) exp(y) + sqrt(x^2 + y^2) / cosh(x y)
  const double x0 = 0.7, y0 = -0.4;
  const Jetd x = Jetd::variable(x0, 0, 2);
  const Jetd y = Jetd::variable(y0, 1, 2);
  const Jetd f = sin(x) * exp(y) + sqrt(x * x + y * y) / cosh(x * y);

  // central differences of the closed form, step 1e-4
  auto F = [](double a, double b) {
    return std::sin(a) * std::exp(b) + std::sqrt(a * a + b * b) / std::cosh(a * b);
  };
  const double e = 1e-4;
  CHECK(f.v == doctest::Approx(F(x0, y0)).epsilon(1e-14));
  CHECK(f.g(0) == doctest::Approx((F(x0 + e, y0) - F(x0 - e, y0)) / (2 * e)).epsilon(1e-7));
  CHECK(f.g(1) == doctest::Approx((F(x0, y0 + e) - F(x0, y0 - e)) / (2 * e)).epsilon(1e-7));
  const double fxy = (F(x0 + e, y0 + e) - F(x0 + e, y0 - e) - F(x0 - e, y0 + e) +
                      F(x0 - e, y0 - e)) / (4 * e * e);
  CHECK(f.h(0, 1) == doctest::Approx(fxy).epsilon(1e-5));
  CHECK(f.h(1, 0) == doctest::Approx(f.h(0, 1)).epsilon(1e-14));
  // d^2/dx^2 of sin(x) exp(y) alone is exact in closed form
  const Jetd s = sin(x) * exp(y);
  CHECK(s.h(0, 0) == doctest::Approx(-std::sin(x0) * std::exp(y0)).epsilon(1e-14));
  CHECK(s.h(1, 1) == doctest::Approx(std::sin(x0) * std::exp(y0)).epsilon(1e-14));
}

TEST_CASE("unit sphere identities") {
  const OracleData o = oracle(SurfaceKind::round_sphere);
  const TensorFieldd nu = o.nu();
  for (Index p = 0; p < o.chart().nodes(); ++p) {
    const double th = o.chart().coordinate(p, 0);
    const Eigen::Matrix2d g = Eigen::Vector2d(1.0, std::sin(th) * std::sin(th)).asDiagonal();
    CHECK((Eigen::MatrixXd(o.g.matrix(p)) - g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((nu.node(p) - o.u.node(p)).norm() < 1e-12);
    // outward normal: h = <u_ij, nu> = -g
    CHECK((Eigen::MatrixXd(o.h[0].matrix(p)) + g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((Eigen::MatrixXd(o.k.matrix(p)) - g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(o.H.values()(p, 0) == doctest::Approx(-2.0));
  }
}

TEST_CASE("plane: h = 0, k = 0, constant nu") {
  const OracleData o = oracle(SurfaceKind::plane);
  CHECK(max_abs(o.h[0]) == 0.0);
  CHECK(max_abs(o.k) == 0.0);
  const TensorFieldd nu = o.nu();
  for (Index p = 0; p < nu.nodes(); ++p) CHECK(nu.node(p) == nu.node(0));
}

TEST_CASE("catenoid is minimal") {
  const OracleData o = oracle(SurfaceKind::catenoid, 48);
  CHECK(max_abs(o.H) <= 1e-10);
  const OracleData h = oracle(SurfaceKind::helicoid, 48);
  CHECK(max_abs(h.H) <= 1e-10);
}

TEST_CASE("oracle invariants on every catalogued surface") {
  for (SurfaceKind kind : all_surfaces()) {
    INFO(to_string(kind));
    SurfaceSpec spec;
    spec.kind = kind;
    const OracleData o = generate(spec, default_chart(spec, grid(spec, spec.m() == 3 ? 12 : 24)));
    CHECK(o.m() == spec.m());
    CHECK(o.n() == spec.n());
    CHECK(o.d() == spec.codim());
    for (Index p = 0; p < o.chart().nodes(); ++p) {
      const Eigen::MatrixXd F = o.frame.matrix(p);
      const Eigen::MatrixXd du = o.du.matrix(p);
      CHECK((F.transpose() * F - Eigen::MatrixXd::Identity(o.d(), o.d())).cwiseAbs().maxCoeff() <
            1e-10);
      CHECK((F.transpose() * du).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((du.transpose() * du - Eigen::MatrixXd(o.g.matrix(p))).cwiseAbs().maxCoeff() < 1e-12);
      for (const auto& h : o.h) {
        const Eigen::MatrixXd hm = h.matrix(p);
        CHECK((hm - hm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("k from finite differences of nu agrees with the oracle") {
  for (SurfaceKind kind : {SurfaceKind::ellipsoid, SurfaceKind::graph, SurfaceKind::catenoid}) {
    INFO(to_string(kind));
    const OracleData o = oracle(kind, 48);
    const GaussField gf = build_gauss_field(o.nu());
    const double err = max_over_interior(o.chart(), 3, [&](Index p) {
      return (gf.k.node(p) - o.k.node(p)).norm() / (1.0 + o.k.node(p).norm());
    });
    CHECK(err <= tau(o.chart()));
  }
}

TEST_CASE("associated family") {
  const SurfaceSpec fam{SurfaceKind::associated_family};
  const Chartd chart = default_chart(fam, {32, 32});
  const OracleData a0 = associated_family(1.0, 0.0, chart);
  const OracleData cat = generate(SurfaceSpec{SurfaceKind::catenoid}, chart);
  CHECK((a0.u.values() - cat.u.values()).cwiseAbs().maxCoeff() < 1e-12);

  const OracleData a90 = associated_family(1.0, std::numbers::pi / 2, chart);
  const OracleData hel = generate(SurfaceSpec{SurfaceKind::helicoid}, chart);
  CHECK((a90.u.values() - hel.u.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a90.g.values() - a0.g.values()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a90.frame.values() - a0.frame.values()).cwiseAbs().maxCoeff() < 1e-10);

  const OracleData a180 = associated_family(1.0, std::numbers::pi, chart);
  CHECK((a180.u.values() + a0.u.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(compare_up_to_translation(a180.u, a0.u) > 0.1);

  // every member is isometric with the same Gauss map
  const OracleData mid = associated_family(1.0, 1.1, chart);
  CHECK((mid.g.values() - a0.g.values()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_abs(mid.H) < 1e-10);
}

TEST_CASE("Gauss and Codazzi residuals of true immersions") {
  for (SurfaceKind kind : {SurfaceKind::round_sphere, SurfaceKind::ellipsoid, SurfaceKind::graph,
                           SurfaceKind::catenoid, SurfaceKind::helicoid}) {
    INFO(to_string(kind));
    SurfaceSpec spec;
    spec.kind = kind;
    std::vector<double> gauss, codazzi;
    for (int n : {32, 64}) {
      const OracleData o = generate(spec, default_chart(spec, {n, n}));
      const GaussCodazziResiduals r = gauss_codazzi_residuals(o, curvature(MetricField(o.g)));
      CHECK(r.gauss <= tau(o.chart()));
      CHECK(r.codazzi <= tau(o.chart()));
      gauss.push_back(r.gauss);
      codazzi.push_back(r.codazzi);
    }
    // residuals at round-off level carry no order information
    if (gauss[1] > 1e-9) CHECK(std::log2(gauss[0] / gauss[1]) >= 1.5);
    if (codazzi[1] > 1e-9) CHECK(std::log2(codazzi[0] / codazzi[1]) >= 1.5);
  }
  const OracleData plane = oracle(SurfaceKind::plane);
  const GaussCodazziResiduals r = gauss_codazzi_residuals(plane, curvature(MetricField(plane.g)));
  CHECK(r.gauss < 1e-12);
  CHECK(r.codazzi < 1e-12);
}

TEST_CASE("Gauss and Codazzi residuals in codimension 2") {
  const OracleData o = oracle(SurfaceKind::clifford_torus, 32);
  const GaussCodazziResiduals r = gauss_codazzi_residuals(o, curvature(MetricField(o.g)));
  CHECK(r.gauss <= tau(o.chart()));
  CHECK(r.codazzi <= tau(o.chart()));
}

TEST_CASE("Codazzi residual responds linearly to a perturbation of h") {
  const OracleData o = oracle(SurfaceKind::ellipsoid, 48);
  const CurvaturePack pack = curvature(MetricField(o.g));
  const double base = gauss_codazzi_residuals(o, pack).codazzi;
  auto response = [&](double eps) {
    std::vector<TensorFieldd> h = o.h;
    for (Index p = 0; p < h[0].nodes(); ++p) h[0].values()(p, 0) += eps * o.chart().coordinate(p, 1);
    return gauss_codazzi_residuals(o, pack, h).codazzi - base;
  };
  const double r1 = response(1e-2), r2 = response(2e-2);
  CHECK(r1 > 1e-3);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("chart windows are validated") {
  SurfaceSpec sphere{SurfaceKind::round_sphere};
  const Chartd polar = build_chart<double>(2, {16, 16}, {0.1, 0.1}, {0.0, 0.0});
  CHECK_THROWS_AS(generate(sphere, polar), DomainError);
  SurfaceSpec bad{SurfaceKind::cylinder};
  bad.radius = -1.0;
  CHECK_THROWS_AS(generate(bad, default_chart(bad, {8, 8})), DomainError);
  const Chartd three = build_chart<double>(3, {8, 8, 8}, {0.1, 0.1, 0.1}, {0.5, 0.5, 0.5});
  CHECK_THROWS_AS(generate(sphere, three), DomainError);
}

TEST_CASE("surface names") {
  for (SurfaceKind k : all_surfaces()) CHECK(surface_from_string(to_string(k)) == k);
  CHECK(surface_from_string("round_sphere") == SurfaceKind::round_sphere);
  CHECK(surface_from_string("ellipsoid-m3") == SurfaceKind::ellipsoid_m3);
  CHECK_FALSE(surface_from_string("torus"));
  CHECK(all_surfaces().size() == 11);
}

TEST_CASE("perturbed Gauss maps stay unit and close, and are reproducible") {
  const OracleData o = oracle(SurfaceKind::ellipsoid);
  const TensorFieldd nu = o.nu();
  const TensorFieldd a = perturb_gauss_map(nu, 1e-2, 9);
  const TensorFieldd b = perturb_gauss_map(nu, 1e-2, 9);
  const TensorFieldd c = perturb_gauss_map(nu, 1e-2, 10);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  double dev = 0.0;
  for (Index p = 0; p < nu.nodes(); ++p) {
    CHECK(std::abs(a.node(p).norm() - 1.0) < 1e-12);
    dev = std::max(dev, (a.node(p) - nu.node(p)).norm());
  }
  CHECK(dev <= 1e-2 + 1e-12);
  CHECK(dev > 1e-3);

  const OracleData t = oracle(SurfaceKind::clifford_torus);
  const TensorFieldd F = perturb_gauss_map(t.frame, 1e-2, 2);
  for (Index p = 0; p < F.nodes(); ++p) {
    const Eigen::MatrixXd m = F.matrix(p);
    CHECK((m.transpose() * m - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}
