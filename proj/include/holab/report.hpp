#pragma once

// Run reports and their deterministic serialization. JSON and CSV output is
// byte-identical for identical (scenario, params, seed): doubles are printed
// with 17 significant digits, key order is fixed, and wall-clock timing stays
// out of the canonical files (it is reported on stdout only).

#include "holab/curvature.hpp"

#include <string>
#include <vector>

namespace holab {

struct Table {
  enum class Kind { Generic, Series, Convergence };

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;  // optional; aligned with rows when used
  std::vector<std::vector<double>> rows;
  Kind kind = Kind::Generic;
};

struct RunParams {
  int steps = 1000;
  double tol = -1.0;  // < 0: per-command default
  int loops = 100;
  std::uint64_t seed = 42;
  CurvatureSign sign = CurvatureSign::Oracle;
  std::string out_dir;
  enum class Format { Json, Csv } format = Format::Json;
};

struct RunReport {
  std::string scenario;
  std::string command;
  RunParams params;
  double tol_used = 0.0;
  std::vector<Table> tables;
  std::vector<std::string> summary;   // one line per check, "PASS ..."/"FAIL ..."
  std::vector<std::string> warnings;
  bool pass = false;
  double timing_ms = 0.0;  // informational; not serialized
};

std::string report_to_json(const RunReport& report);

void write_text_file(const std::string& path, const std::string& content);

// Writes <out_dir>/<scenario>_<command>.json (and .csv per table when the
// format asks for it). Returns the file list.
std::vector<std::string> write_report_files(const RunReport& report, const std::string& out_dir);

// SVG line plots for Series/Convergence tables, with the data table embedded
// in a metadata element and a log-log slope annotation for convergence
// studies. Empty tables produce no file and a warning entry instead.
std::vector<std::string> emit_plots(const RunReport& report, const std::string& out_dir,
                                    std::vector<std::string>* warnings);

}  // namespace holab
