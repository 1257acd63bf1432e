#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaussmap/chart.hpp"

using namespace gaussmap;

namespace {

Chartd square(int n, double dx, double x0 = 0.0) {
  return build_chart<double>(2, {n, n}, {dx, dx}, {x0, x0});
}

TensorFieldd scalar_field(const Chartd& c, double (*fn)(double, double)) {
  return sample_scalar(c, [&](std::span<const double> x) { return fn(x[0], x[1]); });
}

double sin_derivative_error(int n) {
  const double dx = 1.0 / (n - 1);
  const Chartd c = square(n, dx);
  const auto f = scalar_field(c, [](double x, double) { return std::sin(x); });
  const auto d = partial_derivative(f, 0);
  double err = 0.0;
  for (Index p = 0; p < c.nodes(); ++p)
    err = std::max(err, std::abs(d.scalar(p) - std::cos(c.coordinate(p, 0))));
  return err;
}

}  // namespace

TEST_CASE("build_chart: 8x8 chart has 64 nodes") {
  const Chartd c = square(8, 0.1);
  CHECK(c.dim() == 2);
  CHECK(c.nodes() == 64);
  CHECK(c.coordinate(c.nodes() - 1, 1) == doctest::Approx(0.7));
}

TEST_CASE("build_chart: rejects grids too small for the stencils") {
  CHECK_THROWS_AS(build_chart<double>(2, {3, 8}, {0.1, 0.1}, {0.0, 0.0}), ConfigurationError);
}

TEST_CASE("build_chart: rejects dimension mismatches and bad spacing") {
  CHECK_THROWS_AS(build_chart<double>(2, {8, 8, 8}, {0.1, 0.1}, {0.0, 0.0}), ConfigurationError);
  CHECK_THROWS_AS(build_chart<double>(2, {8, 8}, {0.1, -0.1}, {0.0, 0.0}), ConfigurationError);
  CHECK_THROWS_AS(build_chart<double>(0, {}, {}, {}), ConfigurationError);
}

TEST_CASE("build_chart: 3-D chart") {
  const Chartd c = build_chart<double>(3, {16, 16, 16}, {0.05, 0.05, 0.05}, {-0.4, -0.4, -0.4});
  CHECK(c.nodes() == 16 * 16 * 16);
  CHECK(c.max_spacing() == doctest::Approx(0.05));
  const auto x = c.coordinates(c.center());
  for (double xi : x) CHECK(std::abs(xi) <= 0.05);
}

TEST_CASE("center-out traversal visits every node once with adjacent parents") {
  const Chartd c = build_chart<double>(2, {7, 9}, {0.1, 0.1}, {0.0, 0.0});
  const auto t = c.center_out();
  CHECK(static_cast<Index>(t.order.size()) == c.nodes());
  std::vector<int> seen(static_cast<std::size_t>(c.nodes()), 0);
  for (Index p : t.order) ++seen[p];
  for (int s : seen) CHECK(s == 1);
  for (Index p = 0; p < c.nodes(); ++p) {
    if (p == c.center()) continue;
    const auto a = c.multi_index(p);
    const auto b = c.multi_index(t.parent[p]);
    CHECK(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) == 1);
  }
}

TEST_CASE("partial_derivative of a constant vanishes") {
  const Chartd c = square(9, 0.1);
  TensorFieldd f(c, {3}, Valence{0, 0, 1}, 3);
  f.values().rowwise() = Eigen::RowVector3d(1.0, -2.0, 3.5);
  for (int a = 0; a < 2; ++a) CHECK(partial_derivative(f, a).values().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial_derivative is exact on linear functions, boundaries included") {
  const Chartd c = build_chart<double>(2, {6, 11}, {0.3, 0.07}, {-1.0, 2.0});
  const auto f = scalar_field(c, [](double x, double) { return x; });
  const auto d0 = partial_derivative(f, 0);
  const auto d1 = partial_derivative(f, 1);
  CHECK((d0.values().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(d1.values().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial_derivative of sin converges at second order") {
  const double e1 = sin_derivative_error(33);
  const double e2 = sin_derivative_error(65);
  const double dx2 = 1.0 / 64;
  CHECK(e2 <= 50.0 * dx2 * dx2);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("partial_derivative is linear") {
  const Chartd c = square(12, 0.1);
  const auto f = scalar_field(c, [](double x, double y) { return std::exp(x) * y; });
  const auto g = scalar_field(c, [](double x, double y) { return std::cos(x * y); });
  const TensorFieldd lhs = partial_derivative(TensorFieldd(2.5 * f + (-1.25) * g), 1);
  const TensorFieldd rhs = 2.5 * partial_derivative(f, 1) + (-1.25) * partial_derivative(g, 1);
  CHECK((lhs.values() - rhs.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mixed partials commute to second order on the interior") {
  auto defect = [](int n) {
    const Chartd c = square(n, 1.0 / (n - 1));
    const auto f = scalar_field(c, [](double x, double y) { return std::sin(2 * x) * std::exp(y); });
    const auto a = partial_derivative(partial_derivative(f, 0), 1);
    const auto b = partial_derivative(partial_derivative(f, 1), 0);
    return max_over_interior(c, 3, [&](Index p) { return std::abs(a.scalar(p) - b.scalar(p)); });
  };
  // identical stencils commute exactly on the interior; anything more is a bug
  CHECK(defect(33) < 1e-10);
  CHECK(defect(65) < 1e-10);
}

TEST_CASE("gradient appends a covariant index") {
  const Chartd c = square(8, 0.2);
  const auto f = sample(c, {2}, Valence{0, 0, 1}, 2,
                        [](std::span<const double> x, Eigen::VectorXd& out) {
                          out << 3 * x[0] + x[1], -x[1];
                        });
  const auto gr = gradient(f);
  CHECK(gr.index_dims() == std::vector<int>{2, 2});
  CHECK(gr.valence() == Valence{1, 0, 1});
  const Eigen::Matrix2d expect{{3.0, 1.0}, {0.0, -1.0}};
  for (Index p = 0; p < c.nodes(); ++p)
    CHECK((Eigen::MatrixXd(gr.matrix(p)) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sample: zero, ramp and sphere parametrization") {
  const Chartd c = build_chart<double>(2, {10, 12}, {0.2, 0.3}, {0.4, -1.0});
  const auto zero = sample(c, {3}, Valence{0, 0, 1}, 3,
                           [](std::span<const double>, Eigen::VectorXd& out) { out.setZero(); });
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);

  const auto ramp = sample_scalar(c, [](std::span<const double> x) { return x[1]; });
  for (Index p = 0; p < c.nodes(); ++p) CHECK(ramp.scalar(p) == c.coordinate(p, 1));

  const auto sphere = sample(c, {3}, Valence{0, 0, 1}, 3,
                             [](std::span<const double> x, Eigen::VectorXd& out) {
                               out << std::sin(x[0]) * std::cos(x[1]),
                                   std::sin(x[0]) * std::sin(x[1]), std::cos(x[0]);
                             });
  std::mt19937 rng(7);
  std::uniform_int_distribution<Index> pick(0, c.nodes() - 1);
  for (int t = 0; t < 10; ++t) {
    const Index p = pick(rng);
    const double th = c.coordinate(p, 0), ph = c.coordinate(p, 1);
    CHECK(sphere.values()(p, 2) == doctest::Approx(std::cos(th)));
    CHECK(sphere.values()(p, 0) == doctest::Approx(std::sin(th) * std::cos(ph)));
    CHECK(sphere.node(p).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("sample reports the node of a non-finite value") {
  const Chartd c = square(8, 0.1);
  try {
    sample_scalar(c, [](std::span<const double> x) {
      return x[0] > 0.35 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    });
    FAIL("expected a SamplingError");
  } catch (const SamplingError& e) {
    CHECK(c.coordinate(e.node(), 0) > 0.35);
  }
}

TEST_CASE("valence must match the index count") {
  const Chartd c = square(8, 0.1);
  CHECK_THROWS_AS(TensorFieldd(c, {2, 2}, Valence{1, 0, 0}), ConfigurationError);
}

TEST_CASE("max_over_interior turns NaN into infinity") {
  const Chartd c = square(9, 0.1);
  const double v = max_over_interior(c, 3, [&](Index p) {
    return p == c.center() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  });
  CHECK(std::isinf(v));
}
