#include "cli_commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace gaussmap::cli {

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::admissible: return kAdmissible;
    case Verdict::rejected: return kRejected;
    case Verdict::inapplicable: return kInapplicable;
  }
  return kUsage;
}

Dataset forward_dataset(const OracleData& oracle, double perturb, std::uint64_t seed) {
  Dataset ds;
  ds.kind = "metric+gauss";
  ds.m = oracle.m();
  ds.n = oracle.n();
  ds.chart = oracle.chart();
  ds.add("g", pack_metric(oracle.g));
  TensorFieldd normals = oracle.d() == 1 ? oracle.nu() : oracle.frame;
  if (perturb != 0.0) normals = perturb_gauss_map(normals, perturb, seed);
  ds.add(oracle.d() == 1 ? "nu" : "frame", std::move(normals));
  return ds;
}

Dataset oracle_dataset(const OracleData& oracle) {
  Dataset ds;
  ds.kind = "immersion";
  ds.m = oracle.m();
  ds.n = oracle.n();
  ds.chart = oracle.chart();
  ds.add("u", oracle.u);
  if (oracle.d() == 1) {
    ds.add("nu", oracle.nu());
    ds.add("h", oracle.h[0]);
    ds.add("k", oracle.k);
    ds.add("H", oracle.mean_curvature());
  } else {
    ds.add("frame", oracle.frame);
    for (int a = 0; a < oracle.d(); ++a) ds.add("h" + std::to_string(a + 1), oracle.h[a]);
    ds.add("k", oracle.k);
    ds.add("H", oracle.H);
  }
  return ds;
}

CheckResult check_dataset(const Dataset& ds, const PipelineOptions& options) {
  if (ds.kind != "metric+gauss")
    throw FormatError("expected a metric+gauss dataset, got '" + ds.kind + "'");
  CheckResult out;
  out.metric.emplace(unpack_metric(ds.field("g"), ds.m));
  const int d = ds.n - ds.m;
  if (d < 1) throw FormatError("n must exceed m");
  if (ds.has("nu") && d == 1) {
    out.gauss.emplace(build_gauss_field(ds.field("nu")));
    out.normals = out.gauss->nu;
    out.report = run_pipeline(*out.metric, *out.gauss, options);
    return out;
  }
  if (!ds.has("frame")) throw FormatError("dataset has neither 'nu' nor 'frame'");
  const TensorFieldd& frame = ds.field("frame");
  if (frame.index_dims() != std::vector<int>{ds.n, d})
    throw FormatError("frame must have dims n x (n - m)");
  if (d == 1) {
    TensorFieldd nu(frame.chart(), {ds.n}, Valence{0, 0, 1}, ds.n);
    nu.values() = frame.values();
    out.gauss.emplace(build_gauss_field(nu));
    out.normals = out.gauss->nu;
    out.report = run_pipeline(*out.metric, *out.gauss, options);
    return out;
  }
  out.codim = true;
  out.report = run_codim_pipeline(*out.metric, frame, options);
  if (out.report.codim) out.normals = out.report.codim->frame;
  else out.normals = build_normal_frame(frame).frame;
  return out;
}

std::optional<Reconstruction> reconstruct(const CheckResult& check, const Tolerances& tol,
                                          bool strict) {
  const TensorFieldd* U = check.report.tangent_map();
  if (!U) return std::nullopt;
  Reconstruction r;
  r.integration = integrate(*U, std::nullopt, std::nullopt, tol, strict);
  r.residuals = verify_immersion(r.integration.immersion, *check.metric, *check.normals,
                                 tol.interior_margin);
  return r;
}

int sign_against_oracle(const CheckResult& check, const OracleData& oracle) {
  const Index c = oracle.chart().center();
  if (check.report.candidate) {
    const double dot = check.report.candidate->h.node(c).dot(oracle.h[0].node(c));
    return dot < 0.0 ? -1 : 1;
  }
  if (check.report.codim) {
    const auto& sol = *check.report.codim;
    const Eigen::VectorXd mine = Eigen::MatrixXd(sol.frame.matrix(c)) * sol.H.matrix(c);
    const Eigen::VectorXd theirs = Eigen::MatrixXd(oracle.frame.matrix(c)) * oracle.H.matrix(c);
    return mine.dot(theirs) < 0.0 ? -1 : 1;
  }
  return 1;
}

namespace {

std::optional<double> reconstruction_error(const CheckResult& check, const OracleData& oracle,
                                           const Tolerances& tol) {
  const auto interior = oracle.chart().interior(tol.interior_margin);
  auto error_for = [&](const TensorFieldd& U, int sign) {
    const Integration in = integrate(U, std::nullopt, std::nullopt, tol, false);
    const TensorFieldd target = static_cast<double>(sign) * oracle.u;
    return compare_up_to_translation(in.immersion.u, target, &interior);
  };
  if (check.report.candidate)
    return error_for(check.report.candidate->U, sign_against_oracle(check, oracle));
  if (!check.report.codim) return std::nullopt;
  // several admissible branches may exist; the oracle is one of them
  std::vector<const CodimSolution*> sols{&*check.report.codim};
  for (const auto& s : check.report.other_branches) sols.push_back(&s);
  double best = std::numeric_limits<double>::infinity();
  for (const auto* s : sols)
    for (int sign : {1, -1}) best = std::min(best, error_for(s->U, sign));
  return best;
}

double gating_ratio(const AdmissibilityReport& r) {
  double worst = 0.0;
  for (const auto& [k, v] : r.residuals)
    if (v.gating && v.threshold > 0.0) worst = std::max(worst, v.value / v.threshold);
  return worst;
}

std::string method_name(const AdmissibilityReport& r) {
  if (r.candidate) return std::string(to_string(r.candidate->method));
  if (r.codim) return std::string(to_string(Method::codim_fixed_vector));
  return "none";
}

}  // namespace

std::vector<RoundtripRow> roundtrip(const SurfaceSpec& spec, std::vector<int> shape, int levels,
                                    const PipelineOptions& options, double perturb,
                                    std::uint64_t seed) {
  std::vector<RoundtripRow> rows;
  for (int level = 0; level < std::max(levels, 1); ++level) {
    const Chartd chart = default_chart(spec, shape);
    const OracleData oracle = generate(spec, chart);
    const Dataset ds = forward_dataset(oracle, perturb, seed);
    const CheckResult check = check_dataset(ds, options);
    RoundtripRow row;
    row.surface = std::string(to_string(spec.kind));
    row.shape = shape;
    row.spacing = chart.max_spacing();
    row.verdict = check.report.verdict;
    row.method = method_name(check.report);
    row.max_residual = gating_ratio(check.report);
    if (check.report.has("nullspace_gap")) row.nullspace_gap = check.report.value("nullspace_gap");
    if (check.report.verdict == Verdict::admissible &&
        !(check.report.candidate && check.report.candidate->method == Method::minimal_m2))
      row.reconstruction_error = reconstruction_error(check, oracle, options.tol);
    if (!rows.empty() && rows.back().reconstruction_error && row.reconstruction_error &&
        *row.reconstruction_error > 0.0)
      row.order = std::log(*rows.back().reconstruction_error / *row.reconstruction_error) /
                  std::log(rows.back().spacing / row.spacing);
    rows.push_back(std::move(row));
    for (auto& s : shape) s *= 2;
  }
  return rows;
}

namespace {

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigurationError(std::string("cannot parse ") + what + " '" + s + "'");
    }
  }
  return out;
}

std::vector<int> parse_grid(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigurationError("cannot parse grid '" + s + "' (expected AxB or AxBxC)");
    }
  }
  return out;
}

struct SurfaceArgs {
  std::string surface;
  double radius = 1.0;
  std::string axes;
  std::string coeffs;
  double c = 1.0;
  double theta = 0.0;
  double r1 = 1.0, r2 = 1.0;
  std::string grid;
  std::string spacing;
  std::string origin;

  void add_to(CLI::App* app) {
    app->add_option("--surface", surface, "surface name")->required();
    app->add_option("--radius", radius, "radius (round-sphere, cylinder, hypersphere-m3)");
    app->add_option("--axes", axes, "comma-separated semi-axes (ellipsoid, ellipsoid-m3)");
    app->add_option("--coeffs", coeffs, "graph coefficients a,b,c of z = ax^2 + by^2 + cxy");
    app->add_option("--c", c, "scale of catenoid/helicoid/associated-family");
    app->add_option("--theta", theta, "associated-family angle");
    app->add_option("--r1", r1, "clifford-torus first radius");
    app->add_option("--r2", r2, "clifford-torus second radius");
    app->add_option("--grid", grid, "grid shape AxB or AxBxC (default 64 per axis)");
    app->add_option("--spacing", spacing, "comma-separated spacing (default: surface window)");
    app->add_option("--origin", origin, "comma-separated origin (default: surface window)");
  }

  SurfaceSpec spec() const {
    const auto kind = surface_from_string(surface);
    if (!kind) throw ConfigurationError("unknown surface '" + surface + "'");
    SurfaceSpec s;
    s.kind = *kind;
    s.radius = radius;
    if (!axes.empty()) s.axes = parse_list(axes, "axes");
    if (!coeffs.empty()) s.coeffs = parse_list(coeffs, "coefficients");
    s.c = c;
    s.theta = theta;
    s.r1 = r1;
    s.r2 = r2;
    return s;
  }

  std::vector<int> shape(const SurfaceSpec& s) const {
    if (grid.empty()) return std::vector<int>(static_cast<std::size_t>(s.m()), 64);
    return parse_grid(grid);
  }

  Chartd chart(const SurfaceSpec& s) const {
    const std::vector<int> sh = shape(s);
    Chartd base = default_chart(s, sh);
    if (spacing.empty() && origin.empty()) return base;
    std::vector<double> sp = spacing.empty() ? base.spacing() : parse_list(spacing, "spacing");
    std::vector<double> org = origin.empty() ? base.origin() : parse_list(origin, "origin");
    return build_chart<double>(s.m(), sh, sp, org);
  }
};

struct PipelineArgs {
  double tol_scale = 50.0;
  std::string method = "auto";
  int sign_branch = 1;

  void add_to(CLI::App* app) {
    app->add_option("--tol-scale", tol_scale, "C in the residual thresholds C*dx^2")
        ->check(CLI::PositiveNumber);
    app->add_option("--method", method, "auto, theorem2, theorem3 or sqrt")
        ->check(CLI::IsMember({"auto", "theorem2", "theorem3", "sqrt"}));
    app->add_option("--sign-branch", sign_branch, "+1 or -1")->check(CLI::IsMember({1, -1}));
  }

  PipelineOptions options() const {
    PipelineOptions o;
    o.tol.scale = tol_scale;
    o.method = *method_choice_from_string(method);
    o.sign_branch = sign_branch;
    return o;
  }
};

void write_plot(const std::string& path, const TensorFieldd& u) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  const Chartd& chart = u.chart();
  os << "#";
  for (int a = 0; a < chart.dim(); ++a) os << " x" << a + 1;
  for (Index c = 0; c < u.components(); ++c) os << " u" << c + 1;
  os << "\n";
  for (Index p = 0; p < chart.nodes(); ++p) {
    for (int a = 0; a < chart.dim(); ++a) os << format_double(chart.coordinate(p, a)) << ' ';
    for (Index c = 0; c < u.components(); ++c) {
      if (c) os << ' ';
      os << format_double(u.values()(p, c));
    }
    os << "\n";
  }
}

void print_report_summary(std::ostream& out, const AdmissibilityReport& r) {
  out << "verdict: " << to_string(r.verdict);
  if (r.failed_step) out << " (failed step " << to_string(*r.failed_step) << ")";
  out << "\n";
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

std::string optional_number(const std::optional<double>& v, int precision = 3) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::setprecision(precision) << std::scientific << *v;
  return os.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Admissibility of metric / Gauss map pairs and reconstruction of immersions"};
  app.require_subcommand(1);

  SurfaceArgs fwd_surface;
  std::string fwd_out;
  double fwd_perturb = 0.0;
  std::uint64_t fwd_seed = 1;
  CLI::App* forward = app.add_subcommand("forward", "sample a catalogued surface");
  fwd_surface.add_to(forward);
  forward->add_option("--out", fwd_out, "output prefix (<out>.data, <out>.oracle)")->required();
  forward->add_option("--perturb", fwd_perturb, "rotate nu by a smooth field of this size");
  forward->add_option("--seed", fwd_seed, "seed of the perturbation");

  std::string check_in, check_out;
  PipelineArgs check_args;
  CLI::App* check = app.add_subcommand("check", "decide admissibility of a dataset");
  check->add_option("--in", check_in, "metric+gauss dataset")->required();
  check->add_option("--out", check_out, "report path (default: standard output)");
  check_args.add_to(check);

  std::string rec_in, rec_out;
  PipelineArgs rec_args;
  CLI::App* rec = app.add_subcommand("reconstruct", "check and integrate du = U");
  rec->add_option("--in", rec_in, "metric+gauss dataset")->required();
  rec->add_option("--out", rec_out, "output prefix (<out>.immersion, <out>.plot, <out>.report)")
      ->required();
  rec_args.add_to(rec);

  SurfaceArgs rt_surface;
  PipelineArgs rt_args;
  int rt_refine = 1;
  double rt_perturb = 0.0;
  std::uint64_t rt_seed = 1;
  CLI::App* rt = app.add_subcommand("roundtrip", "forward, check, reconstruct and compare");
  rt_surface.add_to(rt);
  rt_args.add_to(rt);
  rt->add_option("--refine", rt_refine, "number of resolution levels (grid doubles per level)")
      ->check(CLI::Range(1, 4));
  rt->add_option("--perturb", rt_perturb, "rotate nu by a smooth field of this size");
  rt->add_option("--seed", rt_seed, "seed of the perturbation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*forward) {
      const SurfaceSpec spec = fwd_surface.spec();
      const OracleData oracle = generate(spec, fwd_surface.chart(spec));
      write_dataset_file(fwd_out + ".data", forward_dataset(oracle, fwd_perturb, fwd_seed));
      write_dataset_file(fwd_out + ".oracle", oracle_dataset(oracle));
      out << "wrote " << fwd_out << ".data and " << fwd_out << ".oracle\n";
      return 0;
    }
    if (*check) {
      const CheckResult res = check_dataset(read_dataset_file(check_in), check_args.options());
      if (check_out.empty()) {
        write_report(out, res.report);
      } else {
        std::ofstream os(check_out);
        if (!os) throw FormatError("cannot open '" + check_out + "' for writing");
        write_report(os, res.report);
        print_report_summary(out, res.report);
      }
      return exit_code(res.report.verdict);
    }
    if (*rec) {
      const PipelineOptions opt = rec_args.options();
      const CheckResult res = check_dataset(read_dataset_file(rec_in), opt);
      print_report_summary(out, res.report);
      if (res.report.verdict != Verdict::admissible) return exit_code(res.report.verdict);
      const bool minimal = res.report.candidate && res.report.candidate->method == Method::minimal_m2;
      if (minimal)
        err << "warning: minimal case, the reconstruction is not unique; integrating the "
               "square-root representative\n";
      const auto r = reconstruct(res, opt.tol, !minimal);
      if (!r) {
        err << "error: no candidate tangent map to integrate\n";
        return kInapplicable;
      }
      for (const auto& w : r->integration.warnings) err << "warning: " << w << "\n";
      Dataset imm;
      imm.kind = "immersion";
      imm.m = res.metric->dim();
      imm.n = static_cast<int>(r->integration.immersion.u.components());
      imm.chart = res.metric->chart();
      imm.add("u", r->integration.immersion.u);
      write_dataset_file(rec_out + ".immersion", imm);
      write_plot(rec_out + ".plot", r->integration.immersion.u);
      std::ofstream os(rec_out + ".report");
      write_report(os, res.report,
                   {{"residual.integrability", r->integration.integrability},
                    {"residual.immersion_metric", r->residuals.metric},
                    {"residual.immersion_normal", r->residuals.normal}});
      out << "wrote " << rec_out << ".immersion, .plot and .report\n";
      return exit_code(res.report.verdict);
    }
    if (*rt) {
      const SurfaceSpec spec = rt_surface.spec();
      if (!rt_surface.spacing.empty() || !rt_surface.origin.empty())
        throw ConfigurationError("roundtrip uses the surface's default window");
      const auto rows = roundtrip(spec, rt_surface.shape(spec), rt_refine, rt_args.options(),
                                  rt_perturb, rt_seed);
      out << std::left << std::setw(18) << "surface" << std::setw(12) << "grid" << std::setw(14)
          << "verdict" << std::setw(20) << "method" << std::setw(14) << "max_res/tol"
          << std::setw(14) << "nullspace_gap" << std::setw(14) << "recon_error"
          << "order\n";
      for (const auto& r : rows) {
        std::string grid;
        for (std::size_t i = 0; i < r.shape.size(); ++i)
          grid += (i ? "x" : "") + std::to_string(r.shape[i]);
        std::ostringstream order;
        if (r.order) order << std::fixed << std::setprecision(2) << *r.order;
        else order << "-";
        out << std::left << std::setw(18) << r.surface << std::setw(12) << grid << std::setw(14)
            << to_string(r.verdict) << std::setw(20) << r.method << std::setw(14)
            << optional_number(r.max_residual) << std::setw(14)
            << optional_number(r.nullspace_gap) << std::setw(14)
            << optional_number(r.reconstruction_error) << order.str() << "\n";
      }
      return exit_code(rows.back().verdict);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NodeError& e) {
    err << "error: invalid input data: " << e.what() << "\n";
    return kUsage;
  } catch (const NonIntegrableError& e) {
    err << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace gaussmap::cli
