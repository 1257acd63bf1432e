#include "gaussmap/admissibility.hpp"

#include <array>
#include <cmath>

#include "gaussmap/linalg.hpp"

namespace gaussmap {

namespace {

inline Index idx3(int m, int a, int b, int c) { return (Index(a) * m + b) * m + c; }

void require_same_chart(const TensorFieldd& a, const Chartd& chart, const char* what) {
  if (!(a.chart() == chart))
    throw ConfigurationError(std::string(what) + " lives on a different chart");
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::admissible: return "admissible";
    case Verdict::rejected: return "rejected";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::theorem2: return "theorem2";
    case Method::theorem3: return "theorem3";
    case Method::spd_sqrt: return "spd_sqrt";
    case Method::minimal_m2: return "minimal_m2";
    case Method::codim_fixed_vector: return "codim_fixed_vector";
  }
  return "?";
}

std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::automatic: return "auto";
    case MethodChoice::theorem2: return "theorem2";
    case MethodChoice::theorem3: return "theorem3";
    case MethodChoice::sqrt: return "sqrt";
  }
  return "?";
}

std::string_view to_string(Step s) {
  switch (s) {
    case Step::step1: return "1";
    case Step::step2: return "2";
    case Step::step3: return "3";
    case Step::step4: return "4";
    case Step::minimal_case: return "minimal-case";
  }
  return "?";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::admissible, Verdict::rejected, Verdict::inapplicable})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<Method> method_from_string(std::string_view s) {
  for (Method v : {Method::theorem2, Method::theorem3, Method::spd_sqrt, Method::minimal_m2,
                   Method::codim_fixed_vector})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<MethodChoice> method_choice_from_string(std::string_view s) {
  for (MethodChoice v : {MethodChoice::automatic, MethodChoice::theorem2, MethodChoice::theorem3,
                         MethodChoice::sqrt})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<Step> step_from_string(std::string_view s) {
  for (Step v : {Step::step1, Step::step2, Step::step3, Step::step4, Step::minimal_case})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

PositivityResult step1_positivity(const TensorFieldd& s, const TensorFieldd& k,
                                  const MetricField& g, const Tolerances& tol) {
  const Chartd& chart = g.chart();
  require_same_chart(s, chart, "scalar curvature");
  require_same_chart(k, chart, "third fundamental form");
  PositivityResult r;
  r.threshold = tol.threshold(chart);
  r.q = TensorFieldd(chart, {}, Valence{});
  r.H = TensorFieldd(chart, {}, Valence{});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const double q = s.scalar(p) + (g.inverse().matrix(p).cwiseProduct(k.matrix(p))).sum();
    r.q.scalar(p) = q;
    r.H.scalar(p) = std::sqrt(std::max(q, 0.0));
  }
  r.min_q = std::numeric_limits<double>::infinity();
  r.max_q = -std::numeric_limits<double>::infinity();
  for (Index p : chart.interior(tol.interior_margin)) {
    r.min_q = std::min(r.min_q, r.q.scalar(p));
    r.max_q = std::max(r.max_q, r.q.scalar(p));
  }
  r.residual = std::max(0.0, -r.min_q);
  const double tau = r.threshold;
  if (r.min_q < -tau)
    r.cls = PositivityClass::negative;
  else if (r.min_q > tau)
    r.cls = PositivityClass::positive;
  else if (r.max_q <= tau)
    r.cls = PositivityClass::zero;
  else
    r.cls = PositivityClass::straddles;
  return r;
}

TensorFieldd h_from_theorem2(const TensorFieldd& ricci, const TensorFieldd& k,
                             const TensorFieldd& H, double tau) {
  const Chartd& chart = ricci.chart();
  const int m = chart.dim();
  TensorFieldd h(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const double hp = H.scalar(p);
    if (!(hp > tau))
      throw RoutingError("H = " + std::to_string(hp) + " at node " + std::to_string(p) +
                         " is not bounded away from zero; use the degenerate branch");
    h.matrix(p) = symmetrized(Eigen::MatrixXd(ricci.matrix(p) + k.matrix(p))) / hp;
  }
  return h;
}

TensorFieldd spd_sqrt(const TensorFieldd& k, const MetricField& g, double neg_tol) {
  const Chartd& chart = k.chart();
  const int m = chart.dim();
  TensorFieldd h(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd l = g.cholesky_at(p);
    const auto lt = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd k_on =
        symmetrized(lt.solve(lt.solve(Eigen::MatrixXd(k.matrix(p))).transpose()));
    h.matrix(p) = symmetrized(l * psd_sqrt(k_on, neg_tol, p) * l.transpose());
  }
  return h;
}

TensorFieldd spd_sqrt(const TensorFieldd& k, double neg_tol) {
  const Chartd& chart = k.chart();
  const int m = static_cast<int>(k.matrix(0).rows());
  TensorFieldd h(chart, {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < chart.nodes(); ++p) h.matrix(p) = psd_sqrt(k.matrix(p), neg_tol, p);
  return h;
}

double check_h_squared(const TensorFieldd& h, const TensorFieldd& k, const MetricField& g,
                       int margin) {
  return max_over_interior(g.chart(), margin, [&](Index p) {
    const Eigen::MatrixXd hp = h.matrix(p);
    const Eigen::MatrixXd kp = k.matrix(p);
    return (hp * g.inverse().matrix(p) * hp - kp).norm() / (1.0 + kp.norm());
  });
}

TensorFieldd build_U(const GaussField& gauss, const TensorFieldd& h, double rank_tol) {
  const Chartd& chart = gauss.nu.chart();
  const int m = gauss.m(), n = gauss.n();
  require_same_chart(h, chart, "second fundamental form");
  TensorFieldd U(chart, {n, m}, Valence{1, 0, 1}, n);
  for (Index p = 0; p < chart.nodes(); ++p) {
    const Eigen::MatrixXd t = complement_basis(Eigen::MatrixXd(gauss.nu.matrix(p)));
    const Eigen::MatrixXd a = gauss.A.matrix(p);
    // U = T C with (A^T T) C = -h
    const Eigen::MatrixXd at = a.transpose() * t;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(at);
    const Eigen::VectorXd sv = svd.singularValues();
    if (!(sv(m - 1) > rank_tol * sv(0)))
      throw DegenerateGaussMapError("d nu is not invertible onto nu^perp", p);
    const Eigen::MatrixXd c = at.partialPivLu().solve(-Eigen::MatrixXd(h.matrix(p)));
    U.matrix(p) = t * c;
  }
  return U;
}

double check_isometry(const TensorFieldd& U, const MetricField& g, int margin) {
  return max_over_interior(g.chart(), margin, [&](Index p) {
    const Eigen::MatrixXd u = U.matrix(p);
    const Eigen::MatrixXd gp = g.g().matrix(p);
    return (u.transpose() * u - gp).norm() / (1.0 + gp.norm());
  });
}

double check_parallel(const TensorFieldd& U, const TensorFieldd& christoffel,
                      const TensorFieldd& normals, int margin) {
  const Chartd& chart = U.chart();
  const int n = U.index_dims()[0], m = U.index_dims()[1];
  require_same_chart(christoffel, chart, "Christoffel symbols");
  require_same_chart(normals, chart, "normal field");
  const TensorFieldd dU = gradient(U);  // (c, j, i) = d_i u_j^c
  return max_over_interior(chart, margin, [&](Index p) {
    const Eigen::MatrixXd u = U.matrix(p);
    const Eigen::MatrixXd frame = normals.matrix(p);
    const auto G = christoffel.node(p);
    const double norm = 1.0 + G.norm() * u.norm();
    double worst = 0.0;
    Eigen::VectorXd duij(n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        for (int c = 0; c < n; ++c) duij(c) = dU.values()(p, idx3(m, c, j, i));
        Eigen::VectorXd r = duij - frame * (frame.transpose() * duij);
        for (int k = 0; k < m; ++k) r -= G(idx3(m, k, i, j)) * u.col(k);
        worst = std::max(worst, r.norm());
      }
    return worst / norm;
  });
}

MinimalResiduals check_minimal_m2(const MetricField& g, const CurvaturePack& pack,
                                  const GaussField& gauss, int margin) {
  if (g.dim() != 2) throw RoutingError("the minimal-surface check needs m = 2");
  const Chartd& chart = g.chart();
  MinimalResiduals r;
  r.gauss_condition = max_over_interior(chart, margin, [&](Index p) {
    const double ratio = Eigen::MatrixXd(gauss.k.matrix(p)).determinant() /
                         Eigen::MatrixXd(g.g().matrix(p)).determinant();
    return std::abs(0.5 * pack.scalar.scalar(p) + std::sqrt(std::max(ratio, 0.0)));
  });
  r.conformality = max_over_interior(chart, margin, [&](Index p) {
    const Eigen::MatrixXd l = g.cholesky_at(p);
    const Eigen::MatrixXd a_on =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(gauss.A.matrix(p)).transpose())
            .transpose();
    const Eigen::VectorXd a1 = a_on.col(0), a2 = a_on.col(1);
    const double n1 = a1.norm(), n2 = a2.norm();
    if (n1 == 0.0 || n2 == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(a1.dot(a2)) / (n1 * n2) + std::abs(n1 - n2) / (0.5 * (n1 + n2));
  });
  return r;
}

double codazzi_residual(const TensorFieldd& h, const TensorFieldd& christoffel, int margin) {
  const Chartd& chart = h.chart();
  const int m = chart.dim();
  const TensorFieldd dh = gradient(h);  // (j, k, i) = d_i h_jk
  return max_over_interior(chart, margin, [&](Index p) {
    const auto G = christoffel.node(p);
    const Eigen::MatrixXd hp = h.matrix(p);
    auto nabla = [&](int i, int j, int k) {
      double v = dh.values()(p, idx3(m, j, k, i));
      for (int l = 0; l < m; ++l)
        v -= G(idx3(m, l, i, j)) * hp(l, k) + G(idx3(m, l, i, k)) * hp(j, l);
      return v;
    };
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          worst = std::max(worst, std::abs(nabla(i, j, k) - nabla(j, i, k)));
    const double scale = dh.node(p).cwiseAbs().maxCoeff() + G.cwiseAbs().maxCoeff() * hp.cwiseAbs().maxCoeff();
    return worst / (1.0 + scale);
  });
}

double gauss_equation_residual(const CurvaturePack& pack, const TensorFieldd& h, int margin) {
  const Chartd& chart = h.chart();
  const int m = chart.dim();
  return max_over_interior(chart, margin, [&](Index p) {
    const auto R = pack.riemann_low.node(p);
    const Eigen::MatrixXd hp = h.matrix(p);
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            const double rhs = hp(i, l) * hp(j, k) - hp(i, k) * hp(j, l);
            worst = std::max(worst, std::abs(R(((i * m + j) * m + k) * m + l) - rhs));
          }
    return worst / (1.0 + R.cwiseAbs().maxCoeff());
  });
}

void flip_sign(CandidateSolution& c) {
  c.h *= -1.0;
  c.H *= -1.0;
  c.U *= -1.0;
  c.sign_branch = -c.sign_branch;
}

namespace {

TensorFieldd trace_field(const TensorFieldd& h, const MetricField& g) {
  TensorFieldd H(h.chart(), {}, Valence{});
  for (Index p = 0; p < h.nodes(); ++p)
    H.scalar(p) = (g.inverse().matrix(p).cwiseProduct(h.matrix(p))).sum();
  return H;
}

/// Orients h so that Tr_g h >= 0 at the chart center.
void orient_at_center(TensorFieldd& h, const MetricField& g) {
  const Index c = g.chart().center();
  if ((g.inverse().matrix(c).cwiseProduct(h.matrix(c))).sum() < 0.0) h *= -1.0;
}

void set(AdmissibilityReport& r, const std::string& key, double value, double threshold,
         bool gating = true) {
  r.residuals[key] = Residual{value, threshold, gating};
}

/// Steps 3 and 4 on a candidate h; fills residuals and the verdict.
void finish(AdmissibilityReport& report, const MetricField& g, const GaussField& gauss,
            const CurvaturePack& pack, TensorFieldd h, Method method,
            const PipelineOptions& opt) {
  const int margin = opt.tol.interior_margin;
  const double tau = report.threshold;
  CandidateSolution cand;
  cand.method = method;
  cand.sign_branch = 1;
  cand.h = std::move(h);
  cand.H = trace_field(cand.h, g);
  try {
    cand.U = build_U(gauss, cand.h, opt.tol.rank);
  } catch (const DegenerateGaussMapError& e) {
    report.verdict = Verdict::inapplicable;
    report.notes.push_back(std::string("d nu is not everywhere invertible: ") + e.what());
    return;
  }
  if (opt.sign_branch < 0) flip_sign(cand);

  set(report, "h_squared", check_h_squared(cand.h, gauss.k, g, margin), tau);
  set(report, "isometry", check_isometry(cand.U, g, margin), tau);
  set(report, "parallelity", check_parallel(cand.U, pack.christoffel, gauss.nu, margin), tau);
  set(report, "codazzi", codazzi_residual(cand.h, pack.christoffel, margin), tau, false);
  set(report, "gauss_equation", gauss_equation_residual(pack, cand.h, margin), tau, false);

  report.candidate = std::move(cand);
  if (!report.residuals.at("h_squared").passes()) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step3;
  } else if (!report.residuals.at("isometry").passes() ||
             !report.residuals.at("parallelity").passes()) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step4;
  } else {
    report.verdict = Verdict::admissible;
  }
}

void minimal_case(AdmissibilityReport& report, const MetricField& g, const GaussField& gauss,
                  const CurvaturePack& pack, const PipelineOptions& opt) {
  const int margin = opt.tol.interior_margin;
  const double tau = report.threshold;
  const MinimalResiduals mr = check_minimal_m2(g, pack, gauss, margin);
  set(report, "gauss_condition_m2", mr.gauss_condition, tau);
  set(report, "conformality_m2", mr.conformality, tau);
  if (mr.gauss_condition > tau || mr.conformality > tau) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::minimal_case;
    return;
  }
  report.verdict = Verdict::admissible;
  report.notes.push_back("minimal case: (g, nu) determines the immersion only up to the "
                         "associated family");
  try {
    CandidateSolution cand;
    cand.method = Method::minimal_m2;
    cand.h = spd_sqrt(gauss.k, g, tau);
    cand.H = trace_field(cand.h, g);
    cand.U = build_U(gauss, cand.h, opt.tol.rank);
    if (opt.sign_branch < 0) flip_sign(cand);
    set(report, "h_squared", check_h_squared(cand.h, gauss.k, g, margin), tau, false);
    set(report, "isometry", check_isometry(cand.U, g, margin), tau, false);
    report.candidate = std::move(cand);
    report.warnings.push_back("candidate is the positive square root of k, a representative "
                              "that is not parallel; its integral is not an immersion");
  } catch (const Error& e) {
    report.warnings.push_back(std::string("no representative candidate: ") + e.what());
  }
}

}  // namespace

AdmissibilityReport run_pipeline(const MetricField& g, const GaussField& gauss,
                                 const PipelineOptions& opt) {
  const Chartd& chart = g.chart();
  if (!(gauss.nu.chart() == chart))
    throw ConfigurationError("metric and Gauss map live on different charts");
  if (gauss.m() != g.dim()) throw ConfigurationError("metric and Gauss map dimensions differ");
  const int m = g.dim();

  AdmissibilityReport report;
  report.threshold = opt.tol.threshold(chart);
  const double tau = report.threshold;

  const DegeneracyReport deg = degeneracy_report(gauss, g, opt.tol.rank);
  if (!deg.invertible) {
    report.verdict = Verdict::inapplicable;
    report.notes.push_back("d nu is not everywhere invertible (rank " +
                           std::to_string(deg.min_rank) + " < " + std::to_string(m) +
                           " at node " + std::to_string(deg.worst_node) + ")");
    return report;
  }

  const CurvaturePack pack = curvature(g);
  const PositivityResult pos = step1_positivity(pack.scalar, gauss.k, g, opt.tol);
  set(report, "step1_positivity", pos.residual, tau);

  if (pos.cls == PositivityClass::negative) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step1;
    report.notes.push_back("s + Tr k is negative (min " + std::to_string(pos.min_q) + ")");
    return report;
  }
  if (pos.cls == PositivityClass::straddles) {
    report.verdict = Verdict::inapplicable;
    report.notes.push_back("s + Tr k vanishes on part of the chart only; a smooth square "
                           "root cannot be certified");
    return report;
  }

  const bool positive = pos.cls == PositivityClass::positive;
  auto run_theorem3 = [&]() -> std::optional<Theorem3Result> {
    try {
      return h_from_theorem3(pack, gauss.k, g, opt.tol);
    } catch (const RoutingError& e) {
      report.notes.push_back(std::string("linear system skipped: ") + e.what());
      return std::nullopt;
    }
  };

  switch (opt.method) {
    case MethodChoice::theorem2:
      if (!positive) {
        report.verdict = Verdict::inapplicable;
        report.notes.push_back("closed form needs s + Tr k > 0; it vanishes here");
        return report;
      }
      break;
    case MethodChoice::theorem3:
      if (m < 3) {
        report.verdict = Verdict::inapplicable;
        report.notes.push_back("the linear system determines h only for m >= 3");
        return report;
      }
      break;
    default: break;
  }

  if (opt.method == MethodChoice::sqrt) {
    TensorFieldd h;
    try {
      h = spd_sqrt(gauss.k, g, tau);
    } catch (const NotPsdError& e) {
      report.verdict = Verdict::rejected;
      report.failed_step = Step::step2;
      report.notes.push_back(e.what());
      return report;
    }
    report.warnings.push_back("square-root candidate chosen by request");
    finish(report, g, gauss, pack, std::move(h), Method::spd_sqrt, opt);
    return report;
  }

  const bool use_theorem2 =
      opt.method == MethodChoice::theorem2 || (opt.method == MethodChoice::automatic && positive);
  if (use_theorem2) {
    TensorFieldd h = h_from_theorem2(pack.ricci, gauss.k, pos.H, tau);
    orient_at_center(h, g);
    if (m >= 3) {
      if (auto t3 = run_theorem3()) set(report, "nullspace_gap", t3->max_gap,
                                        opt.tol.gap_threshold(chart), false);
    }
    finish(report, g, gauss, pack, std::move(h), Method::theorem2, opt);
    return report;
  }

  if (m == 2) {
    minimal_case(report, g, gauss, pack, opt);
    return report;
  }

  // degenerate branch, m >= 3: linear system first, square root as fallback
  const auto t3 = run_theorem3();
  if (!t3) {
    report.verdict = Verdict::inapplicable;
    return report;
  }
  const double gap_tol = opt.tol.gap_threshold(chart);
  set(report, "nullspace_gap", t3->max_gap, gap_tol);
  if (t3->no_solution_nodes > 0) {
    report.verdict = Verdict::rejected;
    report.failed_step = Step::step2;
    report.notes.push_back("linear system has no nonzero solution at " +
                           std::to_string(t3->no_solution_nodes) + " interior nodes");
    report.residuals["nullspace_gap"].gating = false;
    set(report, "nullspace_residual", t3->max_residual, gap_tol);
    return report;
  }
  if (t3->ambiguous_nodes > 0) {
    report.residuals["nullspace_gap"].gating = false;
    report.warnings.push_back("solution space of the linear system is not one-dimensional at " +
                              std::to_string(t3->ambiguous_nodes) +
                              " interior nodes; trying the square root of k");
    TensorFieldd h;
    try {
      h = spd_sqrt(gauss.k, g, tau);
    } catch (const NotPsdError& e) {
      report.verdict = Verdict::inapplicable;
      report.notes.push_back(e.what());
      return report;
    }
    finish(report, g, gauss, pack, std::move(h), Method::spd_sqrt, opt);
    if (report.verdict != Verdict::admissible) {
      report.verdict = Verdict::inapplicable;
      report.failed_step.reset();
      report.notes.push_back("indeterminate: neither candidate could be certified");
    }
    return report;
  }
  finish(report, g, gauss, pack, t3->h, Method::theorem3, opt);
  return report;
}

}  // namespace gaussmap
