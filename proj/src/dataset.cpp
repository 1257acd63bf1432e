#include "gaussmap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gaussmap {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s, int line) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

std::string dims_string(const std::vector<int>& dims) {
  if (dims.empty()) return "scalar";
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::vector<int> parse_dims(const std::string& s, int line) {
  if (s == "scalar") return {};
  std::vector<int> dims;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t x = s.find('x', start);
    const std::string part = s.substr(start, x == std::string::npos ? std::string::npos : x - start);
    const int v = parse_int(part, line);
    if (v < 1) throw FormatError("line " + std::to_string(line) + ": bad dimension");
    dims.push_back(v);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  return dims;
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(is_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return split(line);
    }
    throw FormatError(std::string("unexpected end of file, expected ") + expecting);
  }

  /// Next line must be `key v...`; returns the values.
  std::vector<std::string> keyed(const std::string& key) {
    auto tok = next(key.c_str());
    if (tok.empty() || tok[0] != key)
      throw FormatError("line " + std::to_string(number_) + ": expected '" + key + "'");
    tok.erase(tok.begin());
    return tok;
  }

  int number() const { return number_; }

 private:
  std::istream& is_;
  int number_ = 0;
};

std::string residual_text(const AdmissibilityReport& r, const std::string& key, bool threshold) {
  const auto it = r.residuals.find(key);
  if (it == r.residuals.end()) return "n/a";
  return format_double(threshold ? it->second.threshold : it->second.value);
}

}  // namespace

bool Dataset::has(const std::string& name) const {
  for (const auto& [k, v] : fields)
    if (k == name) return true;
  return false;
}

const TensorFieldd& Dataset::field(const std::string& name) const {
  for (const auto& [k, v] : fields)
    if (k == name) return v;
  throw FormatError("dataset has no field '" + name + "'");
}

void Dataset::add(std::string name, TensorFieldd f) {
  fields.emplace_back(std::move(name), std::move(f));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  const Chartd& c = ds.chart;
  os << "gaussmap-dataset\n";
  os << "format_version " << kFormatVersion << "\n";
  os << "kind " << ds.kind << "\n";
  os << "m " << ds.m << "\n";
  os << "n " << ds.n << "\n";
  os << "grid_shape";
  for (int s : c.shape()) os << ' ' << s;
  os << "\nspacing";
  for (double s : c.spacing()) os << ' ' << format_double(s);
  os << "\norigin";
  for (double s : c.origin()) os << ' ' << format_double(s);
  os << "\nfields " << ds.fields.size() << "\n";
  for (const auto& [name, f] : ds.fields) {
    if (!(f.chart() == c)) throw ConfigurationError("field '" + name + "' is on another chart");
    os << "field " << name << ' ' << dims_string(f.index_dims()) << "\n";
    for (Index p = 0; p < f.nodes(); ++p) {
      for (Index j = 0; j < f.components(); ++j) {
        if (j) os << ' ';
        os << format_double(f.values()(p, j));
      }
      os << "\n";
    }
    os << "end\n";
  }
}

Dataset read_dataset(std::istream& is) {
  LineReader in(is);
  auto magic = in.next("header");
  if (magic.size() != 1 || magic[0] != "gaussmap-dataset")
    throw FormatError("not a gaussmap dataset (missing 'gaussmap-dataset' header)");
  auto ver = in.keyed("format_version");
  if (ver.size() != 1 || parse_int(ver[0], in.number()) != kFormatVersion)
    throw FormatError("unsupported format_version");
  Dataset ds;
  auto kind = in.keyed("kind");
  if (kind.size() != 1) throw FormatError("kind takes one value");
  ds.kind = kind[0];
  if (ds.kind != "metric+gauss" && ds.kind != "immersion" && ds.kind != "report")
    throw FormatError("unknown dataset kind '" + ds.kind + "'");
  auto mv = in.keyed("m");
  auto nv = in.keyed("n");
  if (mv.size() != 1 || nv.size() != 1) throw FormatError("m and n take one value each");
  ds.m = parse_int(mv[0], in.number());
  ds.n = parse_int(nv[0], in.number());
  if (ds.m < 1 || ds.n < ds.m) throw FormatError("invalid m/n");

  auto shape_s = in.keyed("grid_shape");
  auto spacing_s = in.keyed("spacing");
  auto origin_s = in.keyed("origin");
  if (static_cast<int>(shape_s.size()) != ds.m || static_cast<int>(spacing_s.size()) != ds.m ||
      static_cast<int>(origin_s.size()) != ds.m)
    throw FormatError("grid_shape/spacing/origin must have m entries");
  std::vector<int> shape;
  std::vector<double> spacing, origin;
  for (int a = 0; a < ds.m; ++a) {
    shape.push_back(parse_int(shape_s[a], in.number()));
    spacing.push_back(parse_double(spacing_s[a], in.number()));
    origin.push_back(parse_double(origin_s[a], in.number()));
  }
  try {
    ds.chart = build_chart<double>(ds.m, shape, spacing, origin);
  } catch (const ConfigurationError& e) {
    throw FormatError(std::string("invalid chart: ") + e.what());
  }

  auto count_s = in.keyed("fields");
  if (count_s.size() != 1) throw FormatError("fields takes one value");
  const int count = parse_int(count_s[0], in.number());
  if (count < 0) throw FormatError("negative field count");
  for (int fi = 0; fi < count; ++fi) {
    auto head = in.keyed("field");
    if (head.size() != 2) throw FormatError("field header needs a name and dims");
    if (ds.has(head[0])) throw FormatError("duplicate field '" + head[0] + "'");
    const std::vector<int> dims = parse_dims(head[1], in.number());
    TensorFieldd f(ds.chart, dims, Valence{static_cast<int>(dims.size()), 0, 0});
    for (Index p = 0; p < ds.chart.nodes(); ++p) {
      auto row = in.next("node values");
      if (static_cast<Index>(row.size()) != f.components())
        throw FormatError("line " + std::to_string(in.number()) + ": field '" + head[0] +
                          "' expects " + std::to_string(f.components()) + " values per node");
      for (Index j = 0; j < f.components(); ++j)
        f.values()(p, j) = parse_double(row[j], in.number());
    }
    auto end = in.next("end");
    if (end.size() != 1 || end[0] != "end")
      throw FormatError("line " + std::to_string(in.number()) + ": field '" + head[0] +
                        "' has more rows than grid nodes");
    ds.add(head[0], std::move(f));
  }
  return ds;
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_dataset(os, ds);
  if (!os) throw FormatError("write to '" + path + "' failed");
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_dataset(is);
}

TensorFieldd pack_metric(const TensorFieldd& g) {
  const int m = g.index_dims().front();
  TensorFieldd out(g.chart(), {m * (m + 1) / 2}, Valence{1, 0, 0});
  for (Index p = 0; p < g.nodes(); ++p) {
    int c = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) out.values()(p, c++) = g.matrix(p)(i, j);
  }
  return out;
}

TensorFieldd unpack_metric(const TensorFieldd& packed, int m) {
  if (packed.index_dims() != std::vector<int>{m * (m + 1) / 2})
    throw FormatError("metric field must hold m(m+1)/2 = " + std::to_string(m * (m + 1) / 2) +
                      " components per node");
  TensorFieldd g(packed.chart(), {m, m}, Valence{2, 0, 0});
  for (Index p = 0; p < packed.nodes(); ++p) {
    int c = 0;
    auto gp = g.matrix(p);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) {
        gp(i, j) = packed.values()(p, c);
        gp(j, i) = packed.values()(p, c);
        ++c;
      }
  }
  return g;
}

void write_report(std::ostream& os, const AdmissibilityReport& r,
                  const std::map<std::string, double>& extra) {
  os << "gaussmap-report\n";
  os << "format_version " << kFormatVersion << "\n";
  os << "verdict " << to_string(r.verdict) << "\n";
  os << "failed_step " << (r.failed_step ? std::string(to_string(*r.failed_step)) : "none")
     << "\n";
  std::string method = "none";
  int sign = 1;
  if (r.candidate) {
    method = std::string(to_string(r.candidate->method));
    sign = r.candidate->sign_branch;
  } else if (r.codim) {
    method = std::string(to_string(Method::codim_fixed_vector));
    sign = r.codim->sign_branch;
  }
  os << "method " << method << "\n";
  os << "sign_branch " << sign << "\n";
  if (r.codim) os << "branch_count " << r.codim->branch_count << "\n";
  os << "tolerance " << format_double(r.threshold) << "\n";
  std::vector<std::string> keys = residual_keys();
  for (const auto& [k, v] : r.residuals)
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  for (const auto& k : keys) {
    os << "residual." << k << ' ' << residual_text(r, k, false) << "\n";
    os << "threshold." << k << ' ' << residual_text(r, k, true) << "\n";
  }
  for (const auto& [k, v] : extra) os << k << ' ' << format_double(v) << "\n";
  for (const auto& n : r.notes) os << "note " << n << "\n";
  for (const auto& w : r.warnings) os << "warning " << w << "\n";
}

ReportFile read_report(std::istream& is) {
  ReportFile out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      if (line != "gaussmap-report") throw FormatError("not a gaussmap report");
      first = false;
      continue;
    }
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "note")
      out.notes.push_back(value);
    else if (key == "warning")
      out.warnings.push_back(value);
    else
      out.values[key] = value;
  }
  if (first) throw FormatError("empty report");
  return out;
}

}  // namespace gaussmap
