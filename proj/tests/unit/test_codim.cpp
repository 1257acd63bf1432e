#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaussmap/admissibility.hpp"
#include "gaussmap/codim.hpp"
#include "gaussmap/forward_oracle.hpp"
#include "gaussmap/reconstruct.hpp"

using namespace gaussmap;

namespace {

constexpr double kC = 50.0;

double tau(const Chartd& c) { return kC * std::pow(c.max_spacing(), 2); }

OracleData torus(int n = 32) {
  SurfaceSpec spec{SurfaceKind::clifford_torus};
  return generate(spec, default_chart(spec, {n, n}));
}

// Normal planes spanned by (0, 0, cos x, sin x) and (cos 2y, sin 2y, 0, 0).
TensorFieldd rotating_frame(const Chartd& c) {
  return sample(c, {4, 2}, Valence{0, 0, 2}, 4, [](std::span<const double> x, Eigen::VectorXd& o) {
    Eigen::Matrix<double, 4, 2> f;
    f << 0, std::cos(2 * x[1]), 0, std::sin(2 * x[1]), std::cos(x[0]), 0, std::sin(x[0]), 0;
    Eigen::Map<Eigen::Matrix<double, 4, 2, Eigen::RowMajor>>(o.data()) = f;
  });
}

// Constant metrics with diagonal entries are realized by flat tori with
// these normals; a constant off-diagonal term is not.
MetricField sheared_metric(const Chartd& c, double shear) {
  TensorFieldd g(c, {2, 2}, Valence{2, 0, 0});
  for (Index p = 0; p < c.nodes(); ++p) g.matrix(p) << 1.0, shear, shear, 1.0;
  return MetricField(std::move(g));
}

MetricField conformal_metric(const Chartd& c, double a) {
  TensorFieldd g(c, {2, 2}, Valence{2, 0, 0});
  for (Index p = 0; p < c.nodes(); ++p) {
    const double x = c.coordinate(p, 0), y = c.coordinate(p, 1);
    g.matrix(p) = (1.0 + a * (x * x + y * y)) * Eigen::Matrix2d::Identity();
  }
  return MetricField(std::move(g));
}

double global_sign_match(const std::vector<TensorFieldd>& a, const std::vector<TensorFieldd>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (double s : {1.0, -1.0}) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      worst = std::max(worst, max_over_interior(a[k].chart(), 3, [&](Index p) {
                         return (a[k].node(p) - s * b[k].node(p)).norm() / (1.0 + b[k].node(p).norm());
                       }));
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST_CASE("normal frames") {
  SUBCASE("constant planes give a constant frame") {
    const Chartd c = build_chart<double>(2, {8, 8}, {0.1, 0.1}, {0.0, 0.0});
    TensorFieldd span(c, {4, 2}, Valence{0, 0, 2}, 4);
    for (Index p = 0; p < c.nodes(); ++p) span.matrix(p) << 1, 1, 0, 1, 2, 0, 0, 3;
    const NormalFrame f = build_normal_frame(span);
    for (Index p = 0; p < c.nodes(); ++p) CHECK((f.frame.node(p) - f.frame.node(0)).norm() < 1e-14);
    for (const auto& A : f.A) CHECK(A.values().cwiseAbs().maxCoeff() < 1e-13);
    const CodimForms forms = third_forms(f);
    for (const auto& k : forms.k_ab) CHECK(k.values().cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("Clifford torus frame is orthonormal") {
    const NormalFrame f = build_normal_frame(torus().frame);
    for (Index p = 0; p < f.frame.nodes(); ++p) {
      const Eigen::MatrixXd F = f.frame.matrix(p);
      CHECK((F.transpose() * F - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("rescaled and mixed spanning sets give the same frame up to one rotation") {
    const OracleData o = torus(16);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> U(0.5, 2.0);
    TensorFieldd span = o.frame;
    for (Index p = 0; p < span.nodes(); ++p) {
      Eigen::Matrix2d mix;
      mix << U(rng), U(rng) - 1.25, 0.3 * U(rng), U(rng);
      span.matrix(p) = Eigen::MatrixXd(o.frame.matrix(p)) * mix;
    }
    const NormalFrame a = build_normal_frame(o.frame);
    const NormalFrame b = build_normal_frame(span);
    const Index c = o.chart().center();
    const Eigen::MatrixXd Q = Eigen::MatrixXd(a.frame.matrix(c)).transpose() * b.frame.matrix(c);
    for (Index p = 0; p < span.nodes(); ++p)
      CHECK((Eigen::MatrixXd(a.frame.matrix(p)) * Q - Eigen::MatrixXd(b.frame.matrix(p)))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
  }
  SUBCASE("rank-deficient spanning sets are rejected") {
    TensorFieldd span = torus(12).frame;
    Eigen::MatrixXd m = span.matrix(20);
    m.col(1) = 2.0 * m.col(0);
    span.matrix(20) = m;
    CHECK_THROWS_AS(build_normal_frame(span), InvalidGrassmannDataError);
  }
}

TEST_CASE("codimension-1 reduction") {
  SurfaceSpec spec{SurfaceKind::ellipsoid};
  const OracleData o = generate(spec, default_chart(spec, {48, 48}));
  const MetricField g(o.g);
  const GaussField gf = build_gauss_field(o.nu());
  const NormalFrame frame = build_normal_frame(o.frame);
  const CodimForms forms = third_forms(frame);
  // the codim forms drop the O(dx^2) normal part of the differenced nu
  CHECK((forms.kab(0, 0).values() - gf.k.values()).cwiseAbs().maxCoeff() <= tau(o.chart()));

  const CurvaturePack pack = curvature(g);
  const MeanCurvatureResult mcv = mean_curvature_vector(forms, pack, g, frame);
  CHECK(mcv.fixed_dim == 1);
  REQUIRE(mcv.branches.size() == 1);
  const auto h = second_forms(forms, mcv.branches[0], pack.ricci, g);

  const PositivityResult pos = step1_positivity(pack.scalar, gf.k, g);
  const TensorFieldd h2 = h_from_theorem2(pack.ricci, gf.k, pos.H, pos.threshold);
  CHECK(global_sign_match(h, {h2}) <= tau(o.chart()));

  const CodimU cu = build_U_codim(frame, h);
  const TensorFieldd U = build_U(gf, h[0]);
  // same frame up to orientation, so the same tangent map
  const Index c = o.chart().center();
  const double s = frame.frame.node(c).dot(gf.nu.node(c)) < 0 ? -1.0 : 1.0;
  CHECK((s * cu.U.values() - U.values()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Clifford torus") {
  const OracleData o = torus(32);
  const MetricField g(o.g);
  const NormalFrame frame = build_normal_frame(o.frame);
  const CodimForms forms = third_forms(frame);
  const CurvaturePack pack = curvature(g);
  const MeanCurvatureResult mcv = mean_curvature_vector(forms, pack, g, frame);
  const double t = tau(o.chart());

  SUBCASE("rho has a unit eigenvalue") {
    CHECK(mcv.fixed_residual <= 1e-6);
    CHECK(mcv.no_fixed_nodes == 0);
    CHECK(mcv.fixed_dim >= 1);
  }
  SUBCASE("one branch reproduces the oracle h up to sign") {
    // oracle frame and reconstructed frame agree here because both start
    // from the same spanning set
    double best = std::numeric_limits<double>::infinity();
    for (const auto& H : mcv.branches) {
      const auto h = second_forms(forms, H, pack.ricci, g);
      CHECK(h_alpha_products_residual(h, forms, g) <= t);
      best = std::min(best, global_sign_match(h, o.h));
    }
    CHECK(best <= t);
  }
  SUBCASE("pipeline is admissible and the reconstruction matches the oracle") {
    const AdmissibilityReport r = run_codim_pipeline(g, o.frame);
    CHECK(r.verdict == Verdict::admissible);
    REQUIRE(r.codim);
    for (const auto& [k, v] : r.residuals)
      if (v.gating) {
        INFO(k);
        CHECK(v.passes());
      }
    double best = std::numeric_limits<double>::infinity();
    std::vector<const CodimSolution*> sols{&*r.codim};
    for (const auto& s : r.other_branches) sols.push_back(&s);
    for (const auto* s : sols) {
      const Integration in = integrate(s->U);
      for (double sign : {1.0, -1.0})
        best = std::min(best, compare_up_to_translation(in.immersion.u, sign * o.u));
    }
    CHECK(best <= t);
  }
  SUBCASE("swapping the normals does not change U") {
    const auto h = second_forms(forms, mcv.branches[0], pack.ricci, g);
    const CodimU a = build_U_codim(frame, h);
    NormalFrame swapped = frame;
    for (Index p = 0; p < swapped.frame.nodes(); ++p) {
      Eigen::MatrixXd m = frame.frame.matrix(p);
      m.col(0).swap(m.col(1));
      swapped.frame.matrix(p) = m;
    }
    std::swap(swapped.A[0], swapped.A[1]);
    const CodimU b = build_U_codim(swapped, {h[1], h[0]});
    CHECK((a.U.values() - b.U.values()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("normal-connection Codazzi and Gauss residuals of the oracle") {
    CHECK(codazzi_residual_codim(o.h, pack.christoffel, frame) <= t);
    CHECK(gauss_equation_residual_codim(pack, o.h) <= t);
  }
}

TEST_CASE("fabricated codimension-2 data") {
  const Chartd c = build_chart<double>(2, {32, 32}, {0.03, 0.03}, {-0.45, -0.45});
  const TensorFieldd span = rotating_frame(c);
  SUBCASE("the unsheared flat metric is a flat torus") {
    const AdmissibilityReport r = run_codim_pipeline(sheared_metric(c, 0.0), span);
    CHECK(r.verdict == Verdict::admissible);
  }
  SUBCASE("flat metric with k != 0 fails the product check") {
    const AdmissibilityReport r = run_codim_pipeline(sheared_metric(c, 0.5), span);
    CHECK(r.verdict == Verdict::rejected);
    REQUIRE(r.failed_step);
    CHECK(*r.failed_step == Step::step3);
  }
  SUBCASE("rho without a unit eigenvalue is rejected") {
    const MetricField g = conformal_metric(c, 0.8);
    const NormalFrame frame = build_normal_frame(span);
    const MeanCurvatureResult mcv =
        mean_curvature_vector(third_forms(frame), curvature(g), g, frame);
    CHECK(mcv.fixed_residual > 10 * mcv.threshold);
    const AdmissibilityReport r = run_codim_pipeline(g, span);
    CHECK(r.verdict == Verdict::rejected);
    REQUIRE(r.failed_step);
    CHECK(*r.failed_step == Step::step2);
    CHECK_FALSE(r.residuals.at("rho_fixed_vector").passes());
  }
  SUBCASE("a flat plane in R^4 is inapplicable") {
    TensorFieldd flat(c, {4, 2}, Valence{0, 0, 2}, 4);
    for (Index p = 0; p < c.nodes(); ++p) flat.matrix(p) << 0, 0, 0, 0, 1, 0, 0, 1;
    const AdmissibilityReport r = run_codim_pipeline(conformal_metric(c, 0.0), flat);
    CHECK(r.verdict == Verdict::inapplicable);
  }
}
