#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gaussmap/admissibility.hpp"
#include "gaussmap/dataset.hpp"
#include "gaussmap/forward_oracle.hpp"
#include "cli_commands.hpp"

using namespace gaussmap;

namespace {

std::string to_text(const Dataset& ds) {
  std::ostringstream os;
  write_dataset(os, ds);
  return os.str();
}

Dataset from_text(const std::string& s) {
  std::istringstream is(s);
  return read_dataset(is);
}

Dataset small_dataset() {
  const Chartd c = build_chart<double>(2, {6, 7}, {0.1, 0.25}, {-0.3, 1.0});
  Dataset ds;
  ds.m = 2;
  ds.n = 3;
  ds.chart = c;
  TensorFieldd g(c, {2, 2}, Valence{2, 0, 0});
  TensorFieldd nu(c, {3}, Valence{0, 0, 1}, 3);
  for (Index p = 0; p < c.nodes(); ++p) {
    g.matrix(p) << 1.0 + 0.1 * p, 0.2, 0.2, 2.0;
    nu.node(p) << 0.0, std::sin(0.1 * p), std::cos(0.1 * p);
  }
  ds.add("g", pack_metric(g));
  ds.add("nu", nu);
  return ds;
}

// Replace the first line starting with `key ` by `line`.
std::string replace_line(const std::string& text, const std::string& key, const std::string& line) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string l;
  bool done = false;
  while (std::getline(is, l)) {
    if (!done && l.rfind(key, 0) == 0) {
      os << line << "\n";
      done = true;
    } else {
      os << l << "\n";
    }
  }
  return os.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = U(rng) * std::pow(10.0, static_cast<int>(U(rng) * 30));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("write, read, write is byte identical") {
  SUBCASE("small hand-built dataset") {
    const std::string a = to_text(small_dataset());
    CHECK(to_text(from_text(a)) == a);
  }
  SUBCASE("oracle datasets of each kind") {
    for (SurfaceKind kind : {SurfaceKind::ellipsoid, SurfaceKind::clifford_torus,
                             SurfaceKind::hypersphere_m3}) {
      SurfaceSpec spec{kind};
      const std::vector<int> shape(kind == SurfaceKind::hypersphere_m3 ? 3 : 2, 8);
      const OracleData o = generate(spec, default_chart(spec, shape));
      for (const Dataset& ds : {cli::forward_dataset(o), cli::oracle_dataset(o)}) {
        const std::string a = to_text(ds);
        const Dataset back = from_text(a);
        CHECK(to_text(back) == a);
        CHECK(back.m == ds.m);
        CHECK(back.n == ds.n);
        CHECK(back.kind == ds.kind);
        CHECK(back.chart == ds.chart);
        REQUIRE(back.fields.size() == ds.fields.size());
        for (std::size_t i = 0; i < ds.fields.size(); ++i) {
          CHECK(back.fields[i].first == ds.fields[i].first);
          CHECK(back.fields[i].second.values() == ds.fields[i].second.values());
        }
      }
    }
  }
}

TEST_CASE("metric packing") {
  const Chartd c = build_chart<double>(3, {5, 5, 5}, {0.1, 0.1, 0.1}, {0.0, 0.0, 0.0});
  TensorFieldd g(c, {3, 3}, Valence{2, 0, 0});
  for (Index p = 0; p < c.nodes(); ++p) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Random();
    const Eigen::Matrix3d s = a * a.transpose() + Eigen::Matrix3d::Identity();
    g.matrix(p) = 0.5 * (s + s.transpose());
  }
  const TensorFieldd packed = pack_metric(g);
  CHECK(packed.index_dims() == std::vector<int>{6});
  // lower triangle in row order
  CHECK(packed.values()(5, 1) == g.matrix(5)(1, 0));
  CHECK(packed.values()(5, 3) == g.matrix(5)(2, 0));
  CHECK(unpack_metric(packed, 3).values() == g.values());
  CHECK_THROWS_AS(unpack_metric(packed, 2), FormatError);
}

TEST_CASE("malformed datasets raise FormatError") {
  const std::string good = to_text(small_dataset());
  auto rejects = [](const std::string& text) {
    CHECK_THROWS_AS(from_text(text), FormatError);
  };
  rejects("");
  rejects("not-a-dataset\n");
  rejects(replace_line(good, "format_version", "format_version 2"));
  rejects(replace_line(good, "kind", "kind unknown"));
  rejects(replace_line(good, "m ", "m 4"));
  rejects(replace_line(good, "grid_shape", "grid_shape 4"));
  rejects(replace_line(good, "spacing", "spacing 0.1 -0.25"));
  rejects(replace_line(good, "spacing", "spacing 0.1 abc"));
  rejects(replace_line(good, "fields", "fields 3"));
  rejects(replace_line(good, "field nu", "field g 3"));
  rejects(replace_line(good, "field nu", "field nu 0"));
  // short row
  {
    const auto pos = good.find("field nu 3\n") + std::string("field nu 3\n").size();
    const auto eol = good.find('\n', pos);
    rejects(good.substr(0, pos) + "1 2\n" + good.substr(eol + 1));
  }
  // one row too many
  {
    const auto pos = good.rfind("end\n");
    rejects(good.substr(0, pos) + "0 0 1\n" + good.substr(pos));
  }
  // truncated file
  rejects(good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(read_dataset_file("/nonexistent/dir/x.txt"), FormatError);
  CHECK_THROWS_AS(small_dataset().field("h"), FormatError);
}

TEST_CASE("comments and blank lines are skipped") {
  const std::string good = to_text(small_dataset());
  std::string noisy = "# produced by hand\n\n" + good;
  noisy.insert(noisy.find("field g"), "\n# the metric\n");
  CHECK(to_text(from_text(noisy)) == good);
}

TEST_CASE("report files") {
  SurfaceSpec spec{SurfaceKind::ellipsoid};
  const OracleData o = generate(spec, default_chart(spec, {32, 32}));
  const AdmissibilityReport r = run_pipeline(MetricField(o.g), build_gauss_field(o.nu()));
  std::ostringstream os;
  write_report(os, r, {{"residual.integrability", 1.5e-7}});
  std::istringstream is(os.str());
  const ReportFile f = read_report(is);

  CHECK(f.values.at("verdict") == "admissible");
  CHECK(f.values.at("failed_step") == "none");
  CHECK(f.values.at("method") == "theorem2");
  CHECK(f.values.at("sign_branch") == "1");
  CHECK(std::stod(f.values.at("tolerance")) == r.threshold);
  CHECK(f.values.at("residual.integrability") == format_double(1.5e-7));
  REQUIRE(residual_keys().size() == 12);
  for (const auto& k : residual_keys()) {
    INFO(k);
    REQUIRE(f.values.count("residual." + k));
    REQUIRE(f.values.count("threshold." + k));
    if (r.has(k))
      CHECK(std::stod(f.values.at("residual." + k)) == r.value(k));
    else
      CHECK(f.values.at("residual." + k) == "n/a");
  }
  // hypersurface reports never carry codimension residuals
  CHECK(f.values.at("residual.rho_fixed_vector") == "n/a");

  std::istringstream bad("verdict admissible\n");
  CHECK_THROWS_AS(read_report(bad), FormatError);
}
