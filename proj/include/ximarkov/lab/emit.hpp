#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ximarkov/error.hpp"
#include "ximarkov/lab/result.hpp"

namespace ximarkov::lab {

/// Shortest round-trip decimal form; integers print without a fraction.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string to_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << table.columns[j];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f << content;
  if (!f) fail(ErrorKind::Io, "write failed for " + path.string());
}

inline void emit_csv(const Table& table, const std::filesystem::path& path) { write_file(path, to_csv(table)); }

namespace detail {

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
inline double tick_step(double span, int target = 6) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0})
    if (f * mag >= raw) return f * mag;
  return 10.0 * mag;
}

}  // namespace detail

inline bool plot_has_points(const Plot& plot) {
  return std::any_of(plot.series.begin(), plot.series.end(), [](const Series& s) { return !s.x.empty(); });
}

/// Standalone SVG line chart, one polyline per series.
inline std::string to_svg(const Plot& plot, int width = 800, int height = 600) {
  const double left = 80, right = 170, top = 50, bottom = 70;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = width - left - right, ph = height - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << detail::escape_xml(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = detail::tick_step(x1 - x0), ys = detail::tick_step(y1 - y0);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << format_number(std::round(t / xs) * xs)
      << "</text>\n";
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << format_number(std::round(t / ys) * ys)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 20
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << detail::escape_xml(plot.x_label)
    << "</text>\n";
  o << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\""
    << " transform=\"rotate(-90 20 " << top + ph / 2 << ")\">" << detail::escape_xml(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = palette[k % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.style == LineStyle::Dotted) o << " stroke-dasharray=\"2,3\"";
    o << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "\"/>\n";
    const double ly = top + 15 + 18.0 * k;
    o << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (s.style == LineStyle::Dotted ? " stroke-dasharray=\"2,3\"" : "")
      << "/>";
    o << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::escape_xml(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Writes the SVG unless the plot has no points; returns whether a file was written.
inline bool emit_svg(const Plot& plot, const std::filesystem::path& path) {
  if (!plot_has_points(plot)) return false;
  write_file(path, to_svg(plot));
  return true;
}

inline std::string metadata_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.meta.experiment;
  j["seed"] = r.meta.seed;
  j["samples"] = r.meta.samples;
  j["grid"] = r.meta.grid;
  j["runtime_seconds"] = r.meta.runtime_seconds;
  for (const auto& t : r.tables) j["tables"][t.name] = t.rows.size();
  for (const auto& c : r.controls) j["controls"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

/// Writes every table as <dir>/<table>.csv, every plot as <dir>/<plot>.svg and
/// <dir>/<experiment>.meta.json. Runtime lives only in the metadata file.
inline std::vector<std::filesystem::path> emit_all(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& t : r.tables) {
    emit_csv(t, dir / (t.name + ".csv"));
    written.push_back(dir / (t.name + ".csv"));
  }
  for (const auto& p : r.plots)
    if (emit_svg(p, dir / (p.name + ".svg"))) written.push_back(dir / (p.name + ".svg"));
  write_file(dir / (r.meta.experiment + ".meta.json"), metadata_json(r));
  written.push_back(dir / (r.meta.experiment + ".meta.json"));
  return written;
}

}  // namespace ximarkov::lab
