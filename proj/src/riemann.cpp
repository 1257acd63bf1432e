#include "gaussmap/riemann.hpp"

#include <cmath>

#include "gaussmap/linalg.hpp"

namespace gaussmap {

namespace {

inline Index idx3(int m, int a, int b, int c) { return (Index(a) * m + b) * m + c; }
inline Index idx4(int m, int a, int b, int c, int d) {
  return ((Index(a) * m + b) * m + c) * m + d;
}

}  // namespace

MetricField::MetricField(TensorFieldd g) : g_(std::move(g)) {
  const int m = g_.chart().dim();
  if (g_.index_dims() != std::vector<int>{m, m})
    throw ConfigurationError("metric field must have index dims {m, m}");
  if (const Index bad = g_.first_non_finite(); bad >= 0)
    throw SamplingError("metric has non-finite entries", bad);
  g_inv_ = TensorFieldd(g_.chart(), {m, m}, Valence{0, 2, 0});
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  for (Index p = 0; p < g_.nodes(); ++p) {
    Eigen::MatrixXd gp = symmetrized(Eigen::MatrixXd(g_.matrix(p)));
    g_.matrix(p) = gp;
    Eigen::LLT<Eigen::MatrixXd> llt(gp);
    if (llt.info() != Eigen::Success)
      throw SingularMetricError("metric is not positive definite", p);
    const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
    if (diag.minCoeff() <= 1e-14 * diag.maxCoeff())
      throw SingularMetricError("metric is numerically singular", p);
    g_inv_.matrix(p) = symmetrized(llt.solve(id));
  }
}

Eigen::MatrixXd MetricField::cholesky_at(Index p) const {
  Eigen::MatrixXd l;
  if (!orthonormal_frame(g_.matrix(p), l))
    throw SingularMetricError("metric is not positive definite", p);
  return l;
}

TensorFieldd christoffel(const MetricField& metric) {
  const Chartd& chart = metric.chart();
  const int m = chart.dim();
  const TensorFieldd dg = gradient(metric.g());  // (j, l, a) = d_a g_jl
  TensorFieldd gamma(chart, {m, m, m}, Valence{2, 1, 0});
  std::vector<double> lowered(static_cast<std::size_t>(m) * m * m);
  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto d = dg.node(p);
    const auto ginv = metric.inverse().matrix(p);
    // first kind: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l)
          lowered[idx3(m, i, j, l)] =
              0.5 * (d(idx3(m, j, l, i)) + d(idx3(m, i, l, j)) - d(idx3(m, i, j, l)));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
          double acc = 0.0;
          for (int l = 0; l < m; ++l) acc += ginv(k, l) * lowered[idx3(m, i, j, l)];
          gamma.values()(p, idx3(m, k, i, j)) = acc;
          gamma.values()(p, idx3(m, k, j, i)) = acc;
        }
  }
  return gamma;
}

CurvaturePack riemann_tensor(const MetricField& metric, const TensorFieldd& gamma) {
  const Chartd& chart = metric.chart();
  const int m = chart.dim();
  if (gamma.index_dims() != std::vector<int>{m, m, m} || !(gamma.chart() == chart))
    throw ConfigurationError("Christoffel symbols do not match the metric");
  const TensorFieldd dgamma = gradient(gamma);  // (k, i, j, a) = d_a Gamma^k_ij

  CurvaturePack pack;
  pack.christoffel = gamma;
  pack.riemann_up = TensorFieldd(chart, {m, m, m, m}, Valence{3, 1, 0});
  pack.riemann_low = TensorFieldd(chart, {m, m, m, m}, Valence{4, 0, 0});
  pack.ricci = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  pack.scalar = TensorFieldd(chart, {}, Valence{});

  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto G = gamma.node(p);
    const auto dG = dgamma.node(p);
    auto up = pack.riemann_up.node(p);
    for (int l = 0; l < m; ++l)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            double r = dG(idx4(m, l, j, k, i)) - dG(idx4(m, l, i, k, j));
            for (int q = 0; q < m; ++q)
              r += G(idx3(m, q, j, k)) * G(idx3(m, l, i, q)) -
                   G(idx3(m, q, i, k)) * G(idx3(m, l, j, q));
            up(idx4(m, l, i, j, k)) = r;
          }
    const auto gp = metric.g().matrix(p);
    auto low = pack.riemann_low.node(p);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            double acc = 0.0;
            for (int q = 0; q < m; ++q) acc += gp(l, q) * up(idx4(m, q, i, j, k));
            low(idx4(m, i, j, k, l)) = acc;
          }
    auto ric = pack.ricci.matrix(p);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int l = 0; l < m; ++l) acc += up(idx4(m, l, l, j, k));
        ric(j, k) = acc;
      }
    pack.scalar.scalar(p) = (metric.inverse().matrix(p).cwiseProduct(ric)).sum();
  }
  return pack;
}

CurvaturePack curvature(const MetricField& g) { return riemann_tensor(g, christoffel(g)); }

TensorFieldd ricci_from_lowered(const CurvaturePack& pack, const MetricField& metric) {
  const Chartd& chart = metric.chart();
  const int m = chart.dim();
  TensorFieldd out(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto low = pack.riemann_low.node(p);
    const auto ginv = metric.inverse().matrix(p);
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < m; ++l) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) acc += ginv(j, k) * low(idx4(m, i, j, k, l));
        out.values()(p, Index(i) * m + l) = acc;
      }
  }
  return out;
}

TensorFieldd raise(const MetricField& metric, const TensorFieldd& b) {
  const int m = metric.dim();
  if (b.index_dims() != std::vector<int>{m, m})
    throw ConfigurationError("raise expects a field with index dims {m, m}");
  TensorFieldd out(b.chart(), {m, m}, Valence{1, 1, 0});
  for (Index p = 0; p < b.nodes(); ++p)
    out.matrix(p) = metric.inverse().matrix(p) * b.matrix(p);
  return out;
}

TensorFieldd lower(const MetricField& metric, const TensorFieldd& b) {
  const int m = metric.dim();
  if (b.index_dims() != std::vector<int>{m, m})
    throw ConfigurationError("lower expects a field with index dims {m, m}");
  TensorFieldd out(b.chart(), {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < b.nodes(); ++p) out.matrix(p) = metric.g().matrix(p) * b.matrix(p);
  return out;
}

Eigen::MatrixXd curvature_operator_at(const CurvaturePack& pack, const MetricField& metric,
                                      Index node, const Eigen::MatrixXd& omega,
                                      double antisymmetry_tol) {
  const int m = metric.dim();
  const Eigen::MatrixXd g = metric.at(node);
  const Eigen::MatrixXd ginv = metric.inverse_at(node);
  const Eigen::MatrixXd go = g * omega;
  const double defect = (go + go.transpose()).norm();
  if (defect > antisymmetry_tol * (1.0 + go.norm()))
    throw DomainError("operator is not antisymmetric with respect to g");
  const Eigen::MatrixXd w = omega * ginv;  // W^{kl}
  const auto low = pack.riemann_low.node(node);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) acc += low(idx4(m, p, j, l, k)) * w(k, l);
      out(p, j) = acc;
    }
  return ginv * out;
}

Eigen::MatrixXd curvature_operator_orthonormal(const Eigen::MatrixXd& r_on,
                                               const Eigen::MatrixXd& omega) {
  const int m = static_cast<int>(omega.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) acc += r_on(p * m + j, l * m + k) * omega(k, l);
      out(p, j) = acc;
    }
  return out;
}

TensorFieldd curvature_operator(const CurvaturePack& pack, const MetricField& metric,
                                const TensorFieldd& omega, double antisymmetry_tol) {
  const int m = metric.dim();
  if (omega.index_dims() != std::vector<int>{m, m})
    throw ConfigurationError("curvature operator expects an operator field {m, m}");
  TensorFieldd out(omega.chart(), {m, m}, Valence{1, 1, 0});
  for (Index p = 0; p < omega.nodes(); ++p)
    out.matrix(p) = curvature_operator_at(pack, metric, p, omega.matrix(p), antisymmetry_tol);
  return out;
}

Eigen::MatrixXd riemann_orthonormal_at(const CurvaturePack& pack, const MetricField& metric,
                                       Index node) {
  const int m = metric.dim();
  const Eigen::MatrixXd l = metric.cholesky_at(node);
  const Eigen::MatrixXd frame =
      l.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::MatrixXd kron(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) kron(i * m + j, a * m + b) = frame(i, a) * frame(j, b);
  const auto low = pack.riemann_low.node(node);
  const Eigen::MatrixXd r =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          low.data(), m * m, m * m);
  return kron.transpose() * r * kron;
}

}  // namespace gaussmap
