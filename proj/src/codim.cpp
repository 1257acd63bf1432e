#include "gaussmap/codim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaussmap/linalg.hpp"

namespace gaussmap {

namespace {

inline Index idx3(int m, int a, int b, int c) { return (Index(a) * m + b) * m + c; }

/// Everything the per-node branch search needs.
struct NodeForms {
  Eigen::MatrixXd g, ginv, minv;
  std::vector<Eigen::MatrixXd> kab;  // alpha * d + beta
  int d = 0;

  NodeForms(const CodimForms& forms, const TensorFieldd& ricci, const MetricField& metric,
            Index p)
      : g(metric.at(p)), ginv(metric.inverse_at(p)), d(forms.d) {
    const Eigen::MatrixXd mm = symmetrized(Eigen::MatrixXd(ricci.matrix(p) + forms.k.matrix(p)));
    minv = mm.partialPivLu().inverse();
    for (const auto& f : forms.k_ab) kab.emplace_back(f.matrix(p));
  }

  std::vector<Eigen::MatrixXd> second(const Eigen::VectorXd& H) const {
    std::vector<Eigen::MatrixXd> h;
    for (int b = 0; b < d; ++b) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(g.rows(), g.cols());
      for (int a = 0; a < d; ++a) s += H(a) * kab[a * d + b];
      h.push_back(symmetrized(g * minv * s));
    }
    return h;
  }

  /// sum_ab |h^a g^{-1} h^b - k^ab|^2
  double mismatch(const Eigen::VectorXd& H) const {
    const auto h = second(H);
    double acc = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        acc += (h[a] * ginv * h[b] - kab[a * d + b]).squaredNorm();
    return acc;
  }

  double k_norm() const {
    double acc = 0.0;
    for (const auto& k : kab) acc += k.squaredNorm();
    return std::sqrt(acc);
  }
};

/// Local minima of the mismatch over directions cos t e1 + sin t e2,
/// t in [0, pi) (t and t + pi give the same mismatch).
std::vector<std::pair<Eigen::VectorXd, double>> circle_roots(const NodeForms& nf,
                                                              const Eigen::MatrixXd& basis,
                                                              double length) {
  constexpr int kSamples = 180;
  const double step = std::numbers::pi / kSamples;
  auto vec = [&](double t) -> Eigen::VectorXd {
    return length * (std::cos(t) * basis.col(0) + std::sin(t) * basis.col(1));
  };
  auto f = [&](double t) { return nf.mismatch(vec(t)); };
  std::vector<double> vals(kSamples);
  for (int i = 0; i < kSamples; ++i) vals[i] = f(i * step);
  std::vector<std::pair<Eigen::VectorXd, double>> out;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < kSamples; ++i) {
    const double prev = vals[(i + kSamples - 1) % kSamples];
    const double next = vals[(i + 1) % kSamples];
    if (!(vals[i] <= prev && vals[i] < next)) continue;
    double lo = (i - 1) * step, hi = (i + 1) * step;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = f(x2);
      }
    }
    const double t = 0.5 * (lo + hi);
    out.emplace_back(vec(t), f(t));
  }
  return out;
}

/// Sign convention at the center: first clearly nonzero ambient component positive.
bool needs_flip(const Eigen::VectorXd& H, const Eigen::MatrixXd& frame) {
  if (frame.cols() == 1) return H(0) < 0.0;
  const Eigen::VectorXd amb = frame * H;
  const double scale = amb.cwiseAbs().maxCoeff();
  for (Index i = 0; i < amb.size(); ++i)
    if (std::abs(amb(i)) > 1e-8 * scale) return amb(i) < 0.0;
  return false;
}

}  // namespace

TensorFieldd NormalFrame::normal(int alpha) const {
  TensorFieldd out(frame.chart(), {n()}, Valence{0, 0, 1}, n());
  for (Index p = 0; p < frame.nodes(); ++p) out.matrix(p) = frame.matrix(p).col(alpha);
  return out;
}

NormalFrame build_normal_frame(const TensorFieldd& spanning) {
  const Chartd& chart = spanning.chart();
  if (spanning.rank() != 2) throw ConfigurationError("spanning sets must have dims {n, d}");
  const int n = spanning.index_dims()[0], d = spanning.index_dims()[1], m = chart.dim();
  if (d < 1 || d >= n) throw ConfigurationError("normal rank must lie in [1, n)");
  if (const Index bad = spanning.first_non_finite(); bad >= 0)
    throw SamplingError("normal data has non-finite entries", bad);

  NormalFrame out;
  out.frame = TensorFieldd(chart, {n, d}, Valence{0, 0, 2}, n);
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd s = spanning.matrix(p);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(s);
    const Eigen::VectorXd diag = qr.matrixQR().topRows(d).diagonal().cwiseAbs();
    if (!(diag.minCoeff() > 1e-10 * std::max(diag.maxCoeff(), s.norm())))
      throw InvalidGrassmannDataError("spanning set is rank deficient", p);
    out.frame.matrix(p) = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  }
  const Eigen::MatrixXd center = out.frame.matrix(chart.center());
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd q = out.frame.matrix(p);
    out.frame.matrix(p) = q * polar_factor(Eigen::MatrixXd(q.transpose() * center));
  }

  const TensorFieldd dF = gradient(out.frame);  // (c, a, i) = d_i nu^a_c
  for (int a = 0; a < d; ++a) {
    TensorFieldd A(chart, {n, m}, Valence{1, 0, 1}, n);
    for (Index p = 0; p < chart.nodes(); ++p) {
      Eigen::MatrixXd da(n, m);
      for (int c = 0; c < n; ++c)
        for (int i = 0; i < m; ++i) da(c, i) = dF.values()(p, (Index(c) * d + a) * m + i);
      const Eigen::MatrixXd f = out.frame.matrix(p);
      A.matrix(p) = da - f * (f.transpose() * da);
    }
    out.A.push_back(std::move(A));
  }
  return out;
}

CodimForms third_forms(const NormalFrame& frame) {
  const Chartd& chart = frame.frame.chart();
  const int m = frame.m(), d = frame.d();
  CodimForms out;
  out.d = d;
  out.k = TensorFieldd(chart, {m, m}, Valence{2, 0, 0});
  for (int i = 0; i < d * d; ++i) out.k_ab.emplace_back(chart, std::vector<int>{m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const Eigen::MatrixXd kab =
            Eigen::MatrixXd(frame.A[a].matrix(p)).transpose() * frame.A[b].matrix(p);
        out.k_ab[a * d + b].matrix(p) = kab;
        if (a == b) sum += kab;
      }
    out.k.matrix(p) = symmetrized(sum);
  }
  return out;
}

MeanCurvatureResult mean_curvature_vector(const CodimForms& forms, const CurvaturePack& pack,
                                          const MetricField& g, const NormalFrame& frame,
                                          const Tolerances& tol) {
  const Chartd& chart = g.chart();
  const int d = forms.d;
  const double eig_tol = tol.eigenvalue_threshold(chart);
  MeanCurvatureResult out;
  out.threshold = eig_tol;
  out.rho = TensorFieldd(chart, {d, d}, Valence{0, 0, 2}, d);

  std::vector<Eigen::MatrixXd> fixed_basis(static_cast<std::size_t>(chart.nodes()));
  std::vector<double> length(static_cast<std::size_t>(chart.nodes()));
  std::vector<int> fixed_count(static_cast<std::size_t>(chart.nodes()));
  for (Index p = 0; p < chart.nodes(); ++p) {
    const NodeForms nf(forms, pack.ricci, g, p);
    Eigen::MatrixXd rho(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) rho(a, b) = (nf.minv * nf.kab[a * d + b]).trace();
    rho = symmetrized(rho);
    out.rho.matrix(p) = rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
    const Eigen::VectorXd dist = (eig.eigenvalues().array() - 1.0).abs();
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return dist(a) < dist(b); });
    int count = 0;
    for (int i = 0; i < d; ++i) count += dist(i) <= eig_tol ? 1 : 0;
    fixed_count[p] = count;
    const int keep = std::min(d, 2);
    Eigen::MatrixXd basis(d, keep);
    for (int i = 0; i < keep; ++i) basis.col(i) = eig.eigenvectors().col(order[i]);
    fixed_basis[p] = basis;
    const double q =
        pack.scalar.scalar(p) + (g.inverse().matrix(p).cwiseProduct(forms.k.matrix(p))).sum();
    length[p] = std::sqrt(std::max(q, 0.0));
  }
  for (Index p : chart.interior(tol.interior_margin)) {
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                        Eigen::MatrixXd(out.rho.matrix(p)), Eigen::EigenvaluesOnly)
                        .eigenvalues();
    out.fixed_residual = std::max(out.fixed_residual, (ev.array() - 1.0).abs().minCoeff());
    if (fixed_count[p] == 0) ++out.no_fixed_nodes;
  }
  const Index c = chart.center();
  out.fixed_dim = fixed_count[c];
  if (out.fixed_dim == 0 || out.fixed_dim > 2) return out;

  const auto trav = chart.center_out();
  const Eigen::MatrixXd center_frame = frame.frame.matrix(c);

  if (out.fixed_dim == 1) {
    TensorFieldd H(chart, {d}, Valence{0, 0, 1}, frame.n());
    for (Index p : trav.order) {
      Eigen::VectorXd v = length[p] * fixed_basis[p].col(0);
      const Index parent = trav.parent[p];
      if (parent == p) {
        if (needs_flip(v, center_frame)) v = -v;
      } else if (v.dot(Eigen::VectorXd(H.matrix(parent))) < 0.0) {
        v = -v;
      }
      H.matrix(p) = v;
    }
    out.branches.push_back(std::move(H));
    return out;
  }

  // two-dimensional fixed space: search the circle of admissible lengths
  const double tau = tol.threshold(chart);
  const NodeForms center_forms(forms, pack.ricci, g, c);
  std::vector<Eigen::VectorXd> seeds;
  const auto center_roots = circle_roots(center_forms, fixed_basis[c], length[c]);
  for (auto [v, f] : center_roots) {
    if (std::sqrt(f) > tau * (1.0 + center_forms.k_norm())) continue;
    if (needs_flip(v, center_frame)) v = -v;
    seeds.push_back(v);
  }
  // keep the closest direction so the product check reports the mismatch
  if (seeds.empty() && !center_roots.empty()) {
    auto best = std::min_element(center_roots.begin(), center_roots.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    Eigen::VectorXd v = best->first;
    if (needs_flip(v, center_frame)) v = -v;
    seeds.push_back(v);
  }
  std::sort(seeds.begin(), seeds.end(), [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd aa = center_frame * a, bb = center_frame * b;
    for (Index i = 0; i < aa.size(); ++i)
      if (std::abs(aa(i) - bb(i)) > 1e-9) return aa(i) > bb(i);
    return false;
  });

  std::vector<std::vector<Eigen::VectorXd>> roots(static_cast<std::size_t>(chart.nodes()));
  for (Index p = 0; p < chart.nodes(); ++p) {
    const NodeForms nf(forms, pack.ricci, g, p);
    for (auto& [v, f] : circle_roots(nf, fixed_basis[p], length[p])) roots[p].push_back(v);
  }
  for (const Eigen::VectorXd& seed : seeds) {
    TensorFieldd H(chart, {d}, Valence{0, 0, 1}, frame.n());
    for (Index p : trav.order) {
      const Index parent = trav.parent[p];
      const Eigen::VectorXd ref = parent == p ? seed : Eigen::VectorXd(H.matrix(parent));
      Eigen::VectorXd best = ref;
      double best_dot = -1.0;
      for (const auto& v : roots[p]) {
        const double dot = std::abs(v.dot(ref));
        if (dot > best_dot) {
          best_dot = dot;
          best = v.dot(ref) < 0.0 ? Eigen::VectorXd(-v) : v;
        }
      }
      if (parent == p) best = seed;
      H.matrix(p) = best;
    }
    out.branches.push_back(std::move(H));
  }
  return out;
}

std::vector<TensorFieldd> second_forms(const CodimForms& forms, const TensorFieldd& H,
                                       const TensorFieldd& ricci, const MetricField& g) {
  const Chartd& chart = g.chart();
  const int m = chart.dim(), d = forms.d;
  std::vector<TensorFieldd> h;
  for (int b = 0; b < d; ++b) h.emplace_back(chart, std::vector<int>{m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const NodeForms nf(forms, ricci, g, p);
    const auto hp = nf.second(H.matrix(p));
    for (int b = 0; b < d; ++b) h[b].matrix(p) = hp[b];
  }
  return h;
}

double h_alpha_products_residual(const std::vector<TensorFieldd>& h, const CodimForms& forms,
                                 const MetricField& g, int margin) {
  const int d = forms.d;
  return max_over_interior(g.chart(), margin, [&](Index p) {
    const Eigen::MatrixXd ginv = g.inverse().matrix(p);
    double worst = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const Eigen::MatrixXd kab = forms.kab(a, b).matrix(p);
        const double r = (Eigen::MatrixXd(h[a].matrix(p)) * ginv * h[b].matrix(p) - kab).norm() /
                         (1.0 + kab.norm());
        worst = std::max(worst, r);
      }
    return worst;
  });
}

CodimU build_U_codim(const NormalFrame& frame, const std::vector<TensorFieldd>& h,
                     double rank_tol, int margin) {
  const Chartd& chart = frame.frame.chart();
  const int n = frame.n(), m = frame.m(), d = frame.d();
  if (static_cast<int>(h.size()) != d)
    throw ConfigurationError("one second fundamental form per normal is required");

  std::vector<Eigen::MatrixXd> tangent(static_cast<std::size_t>(chart.nodes()));
  for (Index p = 0; p < chart.nodes(); ++p)
    tangent[p] = complement_basis(Eigen::MatrixXd(frame.frame.matrix(p)));
  auto block = [&](int a, Index p) -> Eigen::MatrixXd {
    return Eigen::MatrixXd(frame.A[a].matrix(p)).transpose() * tangent[p];
  };
  auto invertible = [&](const Eigen::MatrixXd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    const Eigen::VectorXd sv = svd.singularValues();
    return sv(sv.size() - 1) > rank_tol * sv(0);
  };

  CodimU out;
  for (int a = 0; a < d && out.alpha < 0; ++a) {
    bool ok = true;
    for (Index p = 0; p < chart.nodes() && ok; ++p) ok = invertible(block(a, p));
    if (ok) out.alpha = a;
  }
  out.U = TensorFieldd(chart, {n, m}, Valence{1, 0, 1}, n);
  for (Index p = 0; p < chart.nodes(); ++p) {
    Eigen::MatrixXd c;
    if (out.alpha >= 0) {
      c = block(out.alpha, p).partialPivLu().solve(-Eigen::MatrixXd(h[out.alpha].matrix(p)));
    } else {
      Eigen::MatrixXd stacked(d * m, m), rhs(d * m, m);
      for (int a = 0; a < d; ++a) {
        stacked.middleRows(a * m, m) = block(a, p);
        rhs.middleRows(a * m, m) = -Eigen::MatrixXd(h[a].matrix(p));
      }
      if (!invertible(stacked))
        throw DegenerateGaussMapError("no combination of the d nu^alpha is invertible", p);
      c = stacked.colPivHouseholderQr().solve(rhs);
    }
    out.U.matrix(p) = tangent[p] * c;
  }
  out.consistency = max_over_interior(chart, margin, [&](Index p) {
    const Eigen::MatrixXd u = out.U.matrix(p);
    double worst = 0.0;
    for (int a = 0; a < d; ++a) {
      const Eigen::MatrixXd ha = h[a].matrix(p);
      worst = std::max(worst, (Eigen::MatrixXd(frame.A[a].matrix(p)).transpose() * u + ha).norm() /
                                  (1.0 + ha.norm()));
    }
    return worst;
  });
  return out;
}

double codazzi_residual_codim(const std::vector<TensorFieldd>& h, const TensorFieldd& christoffel,
                              const NormalFrame& frame, int margin) {
  const Chartd& chart = frame.frame.chart();
  const int m = frame.m(), d = frame.d(), n = frame.n();
  std::vector<TensorFieldd> dh;
  for (const auto& ha : h) dh.push_back(gradient(ha));  // (j, k, i) = d_i h_jk
  const TensorFieldd dF = gradient(frame.frame);       // (c, b, i) = d_i nu^b_c
  return max_over_interior(chart, margin, [&](Index p) {
    const auto G = christoffel.node(p);
    const Eigen::MatrixXd f = frame.frame.matrix(p);
    // omega(a, b, i) = <d_i nu^b, nu^a>
    std::vector<double> omega(static_cast<std::size_t>(d) * d * m, 0.0);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int i = 0; i < m; ++i) {
          double acc = 0.0;
          for (int c = 0; c < n; ++c) acc += f(c, a) * dF.values()(p, (Index(c) * d + b) * m + i);
          omega[(a * d + b) * m + i] = acc;
        }
    auto nabla = [&](int a, int i, int j, int k) {
      const auto ha = h[a].matrix(p);
      double v = dh[a].values()(p, idx3(m, j, k, i));
      for (int l = 0; l < m; ++l)
        v -= G(idx3(m, l, i, j)) * ha(l, k) + G(idx3(m, l, i, k)) * ha(j, l);
      for (int b = 0; b < d; ++b) v += omega[(a * d + b) * m + i] * h[b].matrix(p)(j, k);
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
}

double gauss_equation_residual_codim(const CurvaturePack& pack,
                                     const std::vector<TensorFieldd>& h, int margin) {
  const Chartd& chart = pack.ricci.chart();
  const int m = chart.dim();
  return max_over_interior(chart, margin, [&](Index p) {
    const auto R = pack.riemann_low.node(p);
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            double rhs = 0.0;
            for (const auto& ha : h) {
              const auto hp = ha.matrix(p);
              rhs += hp(i, l) * hp(j, k) - hp(i, k) * hp(j, l);
            }
            worst = std::max(worst, std::abs(R(((i * m + j) * m + k) * m + l) - rhs));
          }
    return worst / (1.0 + R.cwiseAbs().maxCoeff());
  });
}

AdmissibilityReport run_codim_pipeline(const MetricField& g, const TensorFieldd& spanning,
                                       const PipelineOptions& opt) {
  const Chartd& chart = g.chart();
  if (!(spanning.chart() == chart))
    throw ConfigurationError("metric and normal data live on different charts");
  const int m = g.dim();
  const int margin = opt.tol.interior_margin;
  AdmissibilityReport report;
  report.threshold = opt.tol.threshold(chart);
  const double tau = report.threshold;
  auto set = [&](const std::string& key, double v, double thr, bool gating = true) {
    report.residuals[key] = Residual{v, thr, gating};
  };

  const NormalFrame frame = build_normal_frame(spanning);
  if (frame.n() - frame.d() != m)
    throw ConfigurationError("normal planes must have dimension n - m");
  const CodimForms forms = third_forms(frame);

  // dnu must be invertible in the stacked sense before anything else
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd t = complement_basis(Eigen::MatrixXd(frame.frame.matrix(p)));
    Eigen::MatrixXd stacked(frame.d() * m, m);
    for (int a = 0; a < frame.d(); ++a)
      stacked.middleRows(a * m, m) = Eigen::MatrixXd(frame.A[a].matrix(p)).transpose() * t;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const Eigen::VectorXd sv = svd.singularValues();
    if (!(sv(m - 1) > opt.tol.rank * sv(0))) {
      report.verdict = Verdict::inapplicable;
      report.notes.push_back("d nu is not everywhere invertible (node " + std::to_string(p) + ")");
      return report;
    }
  }

  const CurvaturePack pack = curvature(g);
  const PositivityResult pos = step1_positivity(pack.scalar, forms.k, g, opt.tol);
  set("step1_positivity", pos.residual, tau);
  if (pos.cls == PositivityClass::negative) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step1;
    report.notes.push_back("s + Tr k is negative (min " + std::to_string(pos.min_q) + ")");
    return report;
  }
  if (pos.cls != PositivityClass::positive) {
    report.verdict = Verdict::inapplicable;
    report.notes.push_back("s + Tr k is not bounded away from zero; the mean curvature "
                           "vector cannot be normalized");
    return report;
  }

  const MeanCurvatureResult mcv = mean_curvature_vector(forms, pack, g, frame, opt.tol);
  set("rho_fixed_vector", mcv.fixed_residual, mcv.threshold);
  if (mcv.no_fixed_nodes > 0 || mcv.fixed_dim == 0) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step2;
    report.notes.push_back("rho has no eigenvalue 1 at " + std::to_string(mcv.no_fixed_nodes) +
                           " interior nodes");
    return report;
  }
  if (mcv.fixed_dim > 2) {
    report.verdict = Verdict::inapplicable;
    report.notes.push_back("fixed space of rho has dimension " + std::to_string(mcv.fixed_dim) +
                           "; direction of H is undetermined");
    return report;
  }
  if (mcv.fixed_dim == 2)
    report.notes.push_back("fixed space of rho is two-dimensional; directions of H were "
                           "searched for h^a h^b = k^ab");
  if (mcv.branches.empty()) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step2;
    report.notes.push_back("no direction in the fixed space satisfies h^a h^b = k^ab");
    return report;
  }

  struct Attempt {
    CodimSolution sol;
    std::map<std::string, Residual> residuals;
    std::optional<Step> failed;
  };
  std::vector<Attempt> attempts;
  for (const auto& H : mcv.branches) {
    Attempt at;
    at.sol.frame = frame.frame;
    at.sol.H = H;
    at.sol.h = second_forms(forms, H, pack.ricci, g);
    CodimU cu;
    try {
      cu = build_U_codim(frame, at.sol.h, opt.tol.rank, margin);
    } catch (const DegenerateGaussMapError& e) {
      report.verdict = Verdict::inapplicable;
      report.notes.push_back(e.what());
      return report;
    }
    at.sol.U = cu.U;
    if (opt.sign_branch < 0) {
      at.sol.H *= -1.0;
      for (auto& ha : at.sol.h) ha *= -1.0;
      at.sol.U *= -1.0;
      at.sol.sign_branch = -1;
    }
    auto put = [&](const std::string& key, double v, bool gating = true) {
      at.residuals[key] = Residual{v, tau, gating};
    };
    put("h_alpha_products", h_alpha_products_residual(at.sol.h, forms, g, margin));
    put("a_alpha_consistency", cu.consistency);
    put("isometry", check_isometry(at.sol.U, g, margin));
    put("parallelity", check_parallel(at.sol.U, pack.christoffel, frame.frame, margin));
    put("codazzi", codazzi_residual_codim(at.sol.h, pack.christoffel, frame, margin), false);
    put("gauss_equation", gauss_equation_residual_codim(pack, at.sol.h, margin), false);
    if (!at.residuals["h_alpha_products"].passes())
      at.failed = Step::step3;
    else if (!at.residuals["a_alpha_consistency"].passes() ||
             !at.residuals["isometry"].passes() || !at.residuals["parallelity"].passes())
      at.failed = Step::step4;
    attempts.push_back(std::move(at));
  }

  int admissible = 0;
  for (const auto& at : attempts) admissible += at.failed ? 0 : 1;
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < attempts.size(); ++i)
    if (!attempts[i].failed) {
      chosen = i;
      break;
    }
  Attempt& best = attempts[chosen];
  for (auto& [k, v] : best.residuals) report.residuals[k] = v;
  best.sol.branch = 0;
  best.sol.branch_count = admissible;
  if (admissible > 1)
    report.notes.push_back(std::to_string(admissible) +
                           " geometrically distinct immersions are compatible with (g, nu)");
  if (best.failed) {
    report.verdict = Verdict::rejected;
    report.failed_step = best.failed;
  } else {
    report.verdict = Verdict::admissible;
  }
  for (std::size_t i = 0; i < attempts.size(); ++i)
    if (!attempts[i].failed && i != chosen) {
      attempts[i].sol.branch = static_cast<int>(report.other_branches.size()) + 1;
      attempts[i].sol.branch_count = admissible;
      report.other_branches.push_back(std::move(attempts[i].sol));
    }
  report.codim = std::move(best.sol);
  return report;
}

}  // namespace gaussmap
