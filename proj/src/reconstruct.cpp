#include "gaussmap/reconstruct.hpp"

#include <cmath>

namespace gaussmap {

double integrability_residual(const TensorFieldd& U, int margin) {
  const Chartd& chart = U.chart();
  if (U.rank() != 2 || U.index_dims()[1] != chart.dim())
    throw ConfigurationError("tangent map must have dims {n, m}");
  const int n = U.index_dims()[0], m = chart.dim();
  const TensorFieldd dU = gradient(U);  // (c, j, i) = d_i u_j^c
  return max_over_interior(chart, margin, [&](Index p) {
    double worst = 0.0;
    const double scale = 1.0 + dU.values().row(p).cwiseAbs().maxCoeff();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) {
          const double diff = dU.values()(p, (c * m + j) * m + i) - dU.values()(p, (c * m + i) * m + j);
          s += diff * diff;
        }
        worst = std::max(worst, std::sqrt(s));
      }
    return worst / scale;
  });
}

Integration integrate(const TensorFieldd& U, std::optional<Index> base,
                      std::optional<Eigen::VectorXd> base_value, const Tolerances& tol,
                      bool strict) {
  const Chartd& chart = U.chart();
  const int m = chart.dim();
  if (U.rank() != 2 || U.index_dims()[1] != m)
    throw ConfigurationError("tangent map must have dims {n, m}");
  if (const Index bad = U.first_non_finite(); bad >= 0)
    throw SamplingError("tangent map has non-finite entries", bad);
  const int n = U.index_dims()[0];

  Integration out;
  out.threshold = tol.threshold(chart);
  out.integrability = integrability_residual(U, tol.interior_margin);
  if (out.integrability > out.threshold) {
    const std::string msg = "mixed partials of U do not commute (residual " +
                            std::to_string(out.integrability) + " > " +
                            std::to_string(out.threshold) + ")";
    if (strict) throw NonIntegrableError(msg, out.integrability);
    out.warnings.push_back(msg);
  }

  Immersion& imm = out.immersion;
  imm.base_point = base.value_or(chart.center());
  if (imm.base_point < 0 || imm.base_point >= chart.nodes())
    throw ConfigurationError("base node outside the chart");
  imm.base_value = base_value.value_or(Eigen::VectorXd::Zero(n));
  if (imm.base_value.size() != n) throw ConfigurationError("base value has the wrong length");
  imm.u = TensorFieldd(chart, {n}, Valence{0, 0, 1}, n);
  imm.u.node(imm.base_point) = imm.base_value.transpose();

  const std::vector<int> b = chart.multi_index(imm.base_point);
  auto on_staircase = [&](Index p, int axis) {
    for (int a = axis + 1; a < m; ++a)
      if (chart.index_along(p, a) != b[a]) return false;
    return true;
  };
  auto step = [&](Index p, Index from, int axis) {
    const double h = chart.spacing(axis);
    const auto up = U.matrix(p);
    const auto uf = U.matrix(from);
    const double sign = p > from ? 1.0 : -1.0;
    imm.u.node(p) = imm.u.node(from) + (sign * 0.5 * h) * (up.col(axis) + uf.col(axis)).transpose();
  };
  for (int axis = 0; axis < m; ++axis) {
    const Index s = chart.stride(axis);
    for (Index p = 0; p < chart.nodes(); ++p)
      if (on_staircase(p, axis) && chart.index_along(p, axis) > b[axis]) step(p, p - s, axis);
    for (Index p = chart.nodes() - 1; p >= 0; --p)
      if (on_staircase(p, axis) && chart.index_along(p, axis) < b[axis]) step(p, p + s, axis);
  }
  return out;
}

ImmersionResiduals verify_immersion(const Immersion& imm, const MetricField& g,
                                    const TensorFieldd& normals, int margin) {
  const Chartd& chart = g.chart();
  if (!(imm.u.chart() == chart) || !(normals.chart() == chart))
    throw ConfigurationError("immersion, metric and normals live on different charts");
  const TensorFieldd du = gradient(imm.u);  // {n, m}
  ImmersionResiduals r;
  r.metric = max_over_interior(chart, margin, [&](Index p) {
    const Eigen::MatrixXd d = du.matrix(p);
    const Eigen::MatrixXd gp = g.g().matrix(p);
    return (d.transpose() * d - gp).norm() / (1.0 + gp.norm());
  });
  r.normal = max_over_interior(chart, margin, [&](Index p) {
    return (Eigen::MatrixXd(normals.matrix(p)).transpose() * du.matrix(p)).norm();
  });
  return r;
}

TensorFieldd second_fundamental_form(const Immersion& imm, const TensorFieldd& nu) {
  const Chartd& chart = imm.u.chart();
  const int m = chart.dim();
  const int n = imm.u.index_dims()[0];
  const TensorFieldd ddu = gradient(gradient(imm.u));  // (c, j, i) = d_i d_j u^c
  TensorFieldd h(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto v = nu.node(p);
    auto hp = h.matrix(p);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += v(c) * ddu.values()(p, (c * m + j) * m + i);
        hp(i, j) = acc;
      }
    hp = (0.5 * (hp + hp.transpose())).eval();
  }
  return h;
}

double compare_up_to_translation(const TensorFieldd& a, const TensorFieldd& b,
                                 const std::vector<Index>* nodes) {
  if (!a.same_shape(b)) throw ConfigurationError("immersions have different shapes");
  std::vector<Index> all;
  if (!nodes) {
    all.resize(static_cast<std::size_t>(a.nodes()));
    for (Index p = 0; p < a.nodes(); ++p) all[p] = p;
    nodes = &all;
  }
  if (nodes->empty()) return 0.0;
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(a.components());
  for (Index p : *nodes) mean += a.node(p) - b.node(p);
  mean /= static_cast<double>(nodes->size());
  double worst = 0.0;
  for (Index p : *nodes) worst = std::max(worst, (a.node(p) - b.node(p) - mean).norm());
  return worst;
}

double compare_up_to_translation(const Immersion& a, const Immersion& b,
                                 const std::vector<Index>* nodes) {
  return compare_up_to_translation(a.u, b.u, nodes);
}

}  // namespace gaussmap
