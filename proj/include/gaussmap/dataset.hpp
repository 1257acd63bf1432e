#pragma once

// Plain-text dataset and report files.
//
//   gaussmap-dataset
//   format_version 1
//   kind metric+gauss | immersion | report
//   m <m>
//   n <n>
//   grid_shape <N_1> ... <N_m>
//   spacing <dx_1> ... <dx_m>
//   origin <x_1> ... <x_m>
//   fields <count>
//   field <name> <dims>        dims: "scalar" or e.g. "3", "4x2"
//   <one line per node, components separated by spaces>
//   end
//
// Numbers are written with 17 significant digits so that reading and
// writing again reproduces the file byte for byte. The metric is stored as
// field "g" holding the lower triangle (0,0), (1,0), (1,1), (2,0), ...

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gaussmap/chart.hpp"
#include "gaussmap/report.hpp"

namespace gaussmap {

inline constexpr int kFormatVersion = 1;

struct Dataset {
  std::string kind = "metric+gauss";
  int m = 0;
  int n = 0;
  Chartd chart;
  std::vector<std::pair<std::string, TensorFieldd>> fields;

  bool has(const std::string& name) const;
  const TensorFieldd& field(const std::string& name) const;  // FormatError if absent
  void add(std::string name, TensorFieldd f);
};

std::string format_double(double v);

void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);
void write_dataset_file(const std::string& path, const Dataset& ds);
Dataset read_dataset_file(const std::string& path);

/// Lower-triangle packing of a symmetric {m, m} field and back.
TensorFieldd pack_metric(const TensorFieldd& g);
TensorFieldd unpack_metric(const TensorFieldd& packed, int m);

/// Key/value view of a report file; keys are unique except "note" and
/// "warning", which are collected in order.
struct ReportFile {
  std::map<std::string, std::string> values;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;
};

void write_report(std::ostream& os, const AdmissibilityReport& report,
                  const std::map<std::string, double>& extra = {});
ReportFile read_report(std::istream& is);

}  // namespace gaussmap
