#include "gaussmap/gauss_data.hpp"

#include <cmath>

#include "gaussmap/linalg.hpp"

namespace gaussmap {

GaussField build_gauss_field(const TensorFieldd& nu_samples) {
  const Chartd& chart = nu_samples.chart();
  const int m = chart.dim();
  if (nu_samples.rank() != 1 || nu_samples.index_dims()[0] != m + 1)
    throw ConfigurationError("Gauss map must be R^(m+1)-valued: expected " +
                             std::to_string(m + 1) + " components");
  if (const Index bad = nu_samples.first_non_finite(); bad >= 0)
    throw SamplingError("Gauss map has non-finite entries", bad);

  GaussField out;
  out.nu = TensorFieldd(chart, {m + 1}, Valence{0, 0, 1}, m + 1);
  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto v = nu_samples.node(p);
    const double len = v.norm();
    if (std::abs(len - 1.0) >= kUnitRenormalizeTolerance)
      throw InvalidGaussMapError("|nu| = " + std::to_string(len) + " is not 1", p);
    out.nu.node(p) = v / len;
  }
  out.A = gradient(out.nu);
  out.k = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const auto a = out.A.matrix(p);
    out.k.matrix(p) = symmetrized(a.transpose() * a);
  }
  return out;
}

DegeneracyReport degeneracy_report(const GaussField& gauss, const MetricField& g,
                                   double rank_tol) {
  const Chartd& chart = gauss.nu.chart();
  const int m = chart.dim();
  DegeneracyReport r;
  r.singular_values = TensorFieldd(chart, {m}, Valence{1, 0, 0});
  r.rank.assign(static_cast<std::size_t>(chart.nodes()), 0);
  r.min_rank = m;
  r.min_ratio = 1.0;
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd l = g.cholesky_at(p);
    // A expressed on a g-orthonormal basis of TM: A L^{-T}.
    const Eigen::MatrixXd a_on =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(gauss.A.matrix(p)).transpose())
            .transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_on);
    const Eigen::VectorXd sv = svd.singularValues();
    r.singular_values.node(p) = sv.transpose();
    const double smax = sv(0);
    int rank = 0;
    for (int i = 0; i < m; ++i)
      if (smax > 0.0 && sv(i) > rank_tol * smax) ++rank;
    r.rank[p] = rank;
    const double ratio = smax > 0.0 ? sv(m - 1) / smax : 0.0;
    if (ratio < r.min_ratio) {
      r.min_ratio = ratio;
      r.worst_node = p;
    }
    r.min_rank = std::min(r.min_rank, rank);
  }
  r.invertible = r.min_rank == m;
  return r;
}

TensorFieldd project_normal_complement(const GaussField& gauss, const TensorFieldd& w) {
  if (!(w.chart() == gauss.nu.chart()) || w.index_dims().empty() ||
      w.index_dims()[0] != gauss.n())
    throw ConfigurationError("projection input must be R^n-valued on the same chart");
  TensorFieldd out = w;
  for (Index p = 0; p < w.nodes(); ++p) {
    const Eigen::VectorXd nu = gauss.nu.matrix(p);
    auto x = out.matrix(p);
    x -= nu * (nu.transpose() * x);
  }
  return out;
}

}  // namespace gaussmap
