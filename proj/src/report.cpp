#include "holab/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace holab {

namespace {

void json_escape(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

const char* sign_name(CurvatureSign s) {
  return s == CurvatureSign::Oracle ? "oracle" : "paper";
}

void append_table(const Table& t, std::string& out) {
  out += "{\"name\":";
  json_escape(t.name, out);
  out += ",\"kind\":";
  json_escape(t.kind == Table::Kind::Generic ? "generic"
              : t.kind == Table::Kind::Series ? "series"
                                              : "convergence",
              out);
  out += ",\"columns\":[";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    json_escape(t.columns[i], out);
  }
  out += "]";
  if (!t.row_labels.empty()) {
    out += ",\"row_labels\":[";
    for (std::size_t i = 0; i < t.row_labels.size(); ++i) {
      if (i) out += ',';
      json_escape(t.row_labels[i], out);
    }
    out += "]";
  }
  out += ",\"rows\":[";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r) out += ',';
    out += '[';
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      if (c) out += ',';
      out += format_double(t.rows[r][c]);
    }
    out += ']';
  }
  out += "]}";
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  std::string out;
  out.reserve(4096);
  out += "{\"schema_version\":1,\"scenario\":";
  json_escape(report.scenario, out);
  out += ",\"command\":";
  json_escape(report.command, out);
  out += ",\"params\":{\"steps\":" + std::to_string(report.params.steps);
  out += ",\"tol\":" + format_double(report.tol_used);
  out += ",\"loops\":" + std::to_string(report.params.loops);
  out += ",\"seed\":" + std::to_string(report.params.seed);
  out += ",\"sign_convention\":";
  json_escape(sign_name(report.params.sign), out);
  out += "},\"tables\":[";
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    if (i) out += ',';
    append_table(report.tables[i], out);
  }
  out += "],\"summary\":[";
  for (std::size_t i = 0; i < report.summary.size(); ++i) {
    if (i) out += ',';
    json_escape(report.summary[i], out);
  }
  out += "],\"warnings\":[";
  for (std::size_t i = 0; i < report.warnings.size(); ++i) {
    if (i) out += ',';
    json_escape(report.warnings[i], out);
  }
  out += "],\"pass\":";
  out += report.pass ? "true" : "false";
  out += "}\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("short write to '" + path + "'");
}

namespace {

std::string sanitized(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir + "'");
}

std::string table_to_csv(const Table& t) {
  std::string out;
  if (!t.row_labels.empty()) out += "label,";
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!t.row_labels.empty()) out += t.row_labels[r] + ",";
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      if (c) out += ',';
      out += format_double(t.rows[r][c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::vector<std::string> write_report_files(const RunReport& report, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::vector<std::string> files;
  const std::string stem = sanitized(report.scenario) + "_" + sanitized(report.command);
  const std::string json_path = out_dir + "/" + stem + ".json";
  write_text_file(json_path, report_to_json(report));
  files.push_back(json_path);
  if (report.params.format == RunParams::Format::Csv) {
    for (const Table& t : report.tables) {
      const std::string csv_path = out_dir + "/" + stem + "_" + sanitized(t.name) + ".csv";
      write_text_file(csv_path, table_to_csv(t));
      files.push_back(csv_path);
    }
  }
  return files;
}

// ---------------------------------------------------------------------------
// SVG plots

namespace {

struct Extent {
  double lo = 0.0, hi = 1.0;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

}  // namespace

std::vector<std::string> emit_plots(const RunReport& report, const std::string& out_dir,
                                    std::vector<std::string>* warnings) {
  ensure_dir(out_dir);
  std::vector<std::string> files;
  const std::string stem = sanitized(report.scenario) + "_" + sanitized(report.command);
  for (const Table& t : report.tables) {
    if (t.kind == Table::Kind::Generic) continue;
    if (t.rows.empty() || t.columns.size() < 2) {
      if (warnings)
        warnings->push_back("plot skipped: table '" + t.name + "' has no plottable rows");
      continue;
    }
    const bool loglog = t.kind == Table::Kind::Convergence;

    auto tx = [&](double v) { return loglog ? std::log2(std::max(v, 1e-300)) : v; };

    const double width = 640, height = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    Extent ex, ey;
    ex.lo = ey.lo = std::numeric_limits<double>::infinity();
    ex.hi = ey.hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : t.rows) {
      ex.widen(tx(row[0]));
      for (std::size_t c = 1; c < row.size(); ++c) ey.widen(tx(row[c]));
    }
    if (ex.hi <= ex.lo) ex.hi = ex.lo + 1.0;
    if (ey.hi <= ey.lo) ey.hi = ey.lo + 1.0;
    auto px = [&](double v) { return ml + (tx(v) - ex.lo) / (ex.hi - ex.lo) * (width - ml - mr); };
    auto py = [&](double v) {
      return height - mb - (tx(v) - ey.lo) / (ey.hi - ey.lo) * (height - mt - mb);
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"14\">" +
           report.scenario + " / " + t.name + "</text>\n";
    // axes
    svg += "<line x1=\"" + coord(ml) + "\" y1=\"" + coord(height - mb) + "\" x2=\"" +
           coord(width - mr) + "\" y2=\"" + coord(height - mb) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + coord(ml) + "\" y1=\"" + coord(mt) + "\" x2=\"" + coord(ml) +
           "\" y2=\"" + coord(height - mb) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + coord(width / 2) + "\" y=\"" + coord(height - 14) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
           t.columns[0] + (loglog ? " (log2)" : "") + "</text>\n";

    for (std::size_t c = 1; c < t.columns.size(); ++c) {
      std::string points;
      for (const auto& row : t.rows) {
        if (c >= row.size()) continue;
        points += coord(px(row[0])) + "," + coord(py(row[c])) + " ";
      }
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[(c - 1) % 4]) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
      svg += "<text x=\"" + coord(width - mr - 4) + "\" y=\"" + coord(mt + 14.0 * c) +
             "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" fill=\"" +
             kPalette[(c - 1) % 4] + "\">" + t.columns[c] + "</text>\n";
    }

    if (loglog && t.rows.size() >= 2) {
      // least-squares slope of log2(y) against log2(x), first series
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (const auto& row : t.rows) {
        const double lx = std::log2(std::max(row[0], 1e-300));
        const double ly = std::log2(std::max(row[1], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      svg += "<text x=\"" + coord(ml + 8) + "\" y=\"" + coord(mt + 14) +
             "\" font-family=\"monospace\" font-size=\"12\">log-log slope " +
             format_double(slope) + "</text>\n";
    }

    svg += "<metadata id=\"data\">\n" + table_to_csv(t) + "</metadata>\n</svg>\n";

    const std::string path = out_dir + "/" + stem + "_" + sanitized(t.name) + ".svg";
    write_text_file(path, svg);
    files.push_back(path);
  }
  return files;
}

}  // namespace holab
