#include <cmath>

#include "gaussmap/admissibility.hpp"
#include "gaussmap/linalg.hpp"

namespace gaussmap {

namespace {

/// Frobenius-orthonormal basis of symmetric m x m matrices.
std::vector<Eigen::MatrixXd> symmetric_basis(int m) {
  std::vector<Eigen::MatrixXd> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
      if (a == b) {
        e(a, a) = 1.0;
      } else {
        e(a, b) = r;
        e(b, a) = r;
      }
      out.push_back(e);
    }
  return out;
}

/// e_a e_b^T - e_b e_a^T, a < b.
std::vector<Eigen::MatrixXd> antisymmetric_basis(int m) {
  std::vector<Eigen::MatrixXd> out;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
      e(a, b) = 1.0;
      e(b, a) = -1.0;
      out.push_back(e);
    }
  return out;
}

}  // namespace

Theorem3Result h_from_theorem3(const CurvaturePack& pack, const TensorFieldd& k,
                               const MetricField& g, const Tolerances& tol) {
  const Chartd& chart = g.chart();
  const int m = chart.dim();
  if (m < 3) throw RoutingError("the linear system determines h only for m >= 3");
  const auto sym = symmetric_basis(m);
  const auto so = antisymmetric_basis(m);
  const int unknowns = static_cast<int>(sym.size());
  const int rows = static_cast<int>(so.size()) * m * m;
  const double gap_tol = tol.gap_threshold(chart);

  Theorem3Result out;
  out.h = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  out.gap = TensorFieldd(chart, {}, Valence{});
  out.residual = TensorFieldd(chart, {}, Valence{});

  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd l = g.cholesky_at(p);
    const auto lt = l.triangularView<Eigen::Lower>();
    // k in the orthonormal frame: L^{-1} k L^{-T}
    const Eigen::MatrixXd k_on =
        symmetrized(lt.solve(lt.solve(Eigen::MatrixXd(k.matrix(p))).transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> keig(k_on);
    const Eigen::VectorXd kl = keig.eigenvalues();
    if (!(kl(0) > tol.rank * std::abs(kl(m - 1))))
      throw RoutingError("third fundamental form is not invertible at node " +
                         std::to_string(p));
    const Eigen::MatrixXd k_inv = keig.eigenvectors() * kl.cwiseInverse().asDiagonal() *
                                  keig.eigenvectors().transpose();
    const Eigen::MatrixXd r_on = riemann_orthonormal_at(pack, g, p);

    Eigen::MatrixXd system(rows, unknowns);
    for (std::size_t w = 0; w < so.size(); ++w) {
      const Eigen::MatrixXd kr = k_inv * curvature_operator_orthonormal(r_on, so[w]);
      for (int c = 0; c < unknowns; ++c) {
        const Eigen::MatrixXd e = sym[c] * kr - 2.0 * so[w] * sym[c];
        system.block(static_cast<Index>(w) * m * m, c, m * m, 1) =
            Eigen::Map<const Eigen::VectorXd>(e.data(), m * m);
      }
    }
    const auto ns = smallest_singular_pair(system);
    out.gap.scalar(p) = ns.gap;
    const double smax = ns.singular_values(0);
    out.residual.scalar(p) = smax > 0.0 ? ns.singular_values(unknowns - 1) / smax : 1.0;

    Eigen::MatrixXd h_on = Eigen::MatrixXd::Zero(m, m);
    for (int c = 0; c < unknowns; ++c) h_on += ns.vector(c) * sym[c];
    const double tr_h2 = (h_on * h_on).trace();
    const double scale = tr_h2 > 0.0 ? std::sqrt(k_on.trace() / tr_h2) : 0.0;
    out.h.matrix(p) = symmetrized(l * (scale * h_on) * l.transpose());
  }

  // Per-node null vectors carry arbitrary signs; continue from the center.
  const auto trav = chart.center_out();
  for (Index p : trav.order) {
    const Index parent = trav.parent[p];
    if (parent == p) continue;
    if (out.h.node(p).dot(out.h.node(parent)) < 0.0) out.h.node(p) *= -1.0;
  }
  const Index c = chart.center();
  const double hc = (g.inverse().matrix(c).cwiseProduct(out.h.matrix(c))).sum();
  bool flip = hc < 0.0;
  if (std::abs(hc) <= tol.threshold(chart)) {
    Index arg = 0;
    out.h.node(c).cwiseAbs().maxCoeff(&arg);
    flip = out.h.values()(c, arg) < 0.0;
  }
  if (flip) out.h *= -1.0;

  const auto interior = chart.interior(tol.interior_margin);
  Index unique = 0;
  for (Index p : interior) {
    const double gap = out.gap.scalar(p), res = out.residual.scalar(p);
    out.max_gap = std::max(out.max_gap, gap);
    out.max_residual = std::max(out.max_residual, res);
    if (res > gap_tol)
      ++out.no_solution_nodes;
    else if (gap >= gap_tol)
      ++out.ambiguous_nodes;
    if (gap < gap_tol) ++unique;
  }
  out.unique_fraction =
      interior.empty() ? 0.0 : static_cast<double>(unique) / static_cast<double>(interior.size());
  return out;
}

}  // namespace gaussmap
