#pragma once

// Minimal SVG plotting for trajectory CSVs: log-log or linear axes, one
// panel per series (2x2 grid for four series) or all series overlaid, and a
// dashed power-law overlay restricted to its fit window.
//
// Plot spec document:
//   {
//     "output": "sigma2.svg",
//     "scale": "loglog",            // or "linear"
//     "layout": "grid",             // or "overlay"
//     "y": "sigma2",                // CSV column to plot against t
//     "title": "...",
//     "series": [
//       {"path": "gamma=0/avg.csv", "label": "gamma=0",
//        "fit": {"exponent": 1.9, "prefactor": 2.1, "t_lo": 1, "t_hi": 56}}
//     ]
//   }
// Relative paths resolve against the directory holding the spec.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qdiff/config.hpp"
#include "qdiff/csv.hpp"
#include "qdiff/error.hpp"

namespace qdiff {

enum class AxisScale { loglog, linear };
enum class PlotLayout { grid, overlay };

struct FitOverlay {
  double exponent = 0.0;
  double prefactor = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct PlotSeries {
  std::filesystem::path path;
  std::string label;
  std::optional<FitOverlay> fit;
};

struct PlotSpec {
  std::filesystem::path output;
  AxisScale scale = AxisScale::loglog;
  PlotLayout layout = PlotLayout::grid;
  std::string y = "sigma2";
  std::string title;
  std::vector<PlotSeries> series;
};

inline PlotSpec plot_spec_from_json(const json& j, const std::filesystem::path& base = {}) {
  try {
    PlotSpec s;
    s.output = j.at("output").get<std::string>();
    if (s.output.is_relative()) s.output = base / s.output;
    const auto scale = j.value("scale", std::string("loglog"));
    if (scale == "loglog") s.scale = AxisScale::loglog;
    else if (scale == "linear") s.scale = AxisScale::linear;
    else throw ConfigError("plot scale must be 'loglog' or 'linear'");
    const auto layout = j.value("layout", std::string("grid"));
    if (layout == "grid") s.layout = PlotLayout::grid;
    else if (layout == "overlay") s.layout = PlotLayout::overlay;
    else throw ConfigError("plot layout must be 'grid' or 'overlay'");
    s.y = j.value("y", std::string("sigma2"));
    s.title = j.value("title", std::string());
    for (const auto& e : j.at("series")) {
      PlotSeries ps;
      ps.path = e.at("path").get<std::string>();
      if (ps.path.is_relative()) ps.path = base / ps.path;
      ps.label = e.value("label", ps.path.parent_path().filename().string());
      if (e.contains("fit") && !e.at("fit").is_null()) {
        const auto& f = e.at("fit");
        ps.fit = FitOverlay{f.at("exponent").get<double>(), f.at("prefactor").get<double>(),
                            f.at("t_lo").get<double>(), f.at("t_hi").get<double>()};
      }
      s.series.push_back(std::move(ps));
    }
    if (s.series.empty()) throw ConfigError("plot spec lists no series");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed plot spec: ") + e.what());
  }
}

/// Plot spec for an experiment directory: one panel per gamma of `y`, with the
/// manifest's fits drawn when plotting sigma2.
inline PlotSpec plot_spec_from_manifest(const std::filesystem::path& dir, std::string y = "sigma2") {
  std::ifstream in(dir / "manifest");
  if (!in) throw IoError("no manifest in " + dir.string());
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw IoError("unreadable manifest in " + dir.string() + ": " + e.what());
  }
  PlotSpec s;
  s.y = y;
  s.title = m.at("config").value("name", std::string());
  const bool qtr = y.rfind("qtr", 0) == 0 || y == "P_L";
  s.scale = qtr ? AxisScale::linear : AxisScale::loglog;
  s.output = dir / (y + ".svg");
  for (const auto& r : m.at("results")) {
    if (r.at("status") != "ok") continue;
    PlotSeries ps;
    ps.path = dir / r.at("files").at("avg").get<std::string>();
    ps.label = "gamma=" + short_double(r.at("gamma").get<double>());
    if (y == "sigma2" && r.contains("fit") && !r.at("fit").is_null()) {
      const auto& f = r.at("fit");
      ps.fit = FitOverlay{f.at("exponent").get<double>(), f.at("prefactor").get<double>(),
                          f.at("t_lo").get<double>(), f.at("t_hi").get<double>()};
    }
    s.series.push_back(std::move(ps));
  }
  if (s.series.empty()) throw ConfigError("manifest in " + dir.string() + " has no plottable results");
  return s;
}

namespace detail {

inline constexpr const char* kPalette[] = {"#2a7d2a", "#c0392b", "#2c5aa0", "#8b5a2b",
                                           "#7d3c98", "#d68910", "#17a589", "#555555"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double px0 = 0.0, px1 = 1.0;  // pixel span

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    const double f = (a - lo) / (hi - lo);
    return px0 + f * (px1 - px0);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= std::floor(hi) + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      return out;
    }
    const double range = hi - lo;
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * range; v += step) out.push_back(v);
    return out;
  }
};

inline std::string tick_label(double v, bool log) {
  std::ostringstream os;
  if (log) {
    os << "1e" << static_cast<int>(std::lround(std::log10(v)));
  } else {
    os << (std::abs(v) < 1e-12 ? 0.0 : v);
  }
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
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

struct LoadedSeries {
  std::vector<double> t, y;
  const PlotSeries* source = nullptr;
};

inline Axis fit_axis(const std::vector<const LoadedSeries*>& series, bool use_t, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* s : series) {
    const auto& v = use_t ? s->t : s->y;
    for (double x : v) {
      if (log && !(x > 0.0)) continue;
      const double a = log ? std::log10(x) : x;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (!std::isfinite(lo)) throw ConfigError("nothing to plot on a logarithmic axis");
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  Axis a;
  a.lo = lo;
  a.hi = hi;
  a.log = log;
  return a;
}

inline void draw_panel(std::ostream& out, const std::vector<const LoadedSeries*>& series,
                       std::size_t color_offset, double x0, double y0, double w, double h,
                       const PlotSpec& spec, const std::string& heading) {
  const bool log = spec.scale == AxisScale::loglog;
  Axis ax = fit_axis(series, true, log), ay = fit_axis(series, false, log);
  const double left = x0 + 70, right = x0 + w - 15, top = y0 + 30, bottom = y0 + h - 45;
  ax.px0 = left;
  ax.px1 = right;
  ay.px0 = bottom;
  ay.px1 = top;

  out << "<rect x='" << left << "' y='" << top << "' width='" << right - left << "' height='"
      << bottom - top << "' fill='none' stroke='#000'/>\n";
  for (double v : ax.ticks()) {
    const double px = ax.map(v);
    out << "<line x1='" << px << "' y1='" << bottom << "' x2='" << px << "' y2='" << bottom + 5
        << "' stroke='#000'/><text x='" << px << "' y='" << bottom + 18
        << "' font-size='11' text-anchor='middle'>" << tick_label(v, log) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double py = ay.map(v);
    out << "<line x1='" << left - 5 << "' y1='" << py << "' x2='" << left << "' y2='" << py
        << "' stroke='#000'/><text x='" << left - 8 << "' y='" << py + 4
        << "' font-size='11' text-anchor='end'>" << tick_label(v, log) << "</text>\n";
  }
  out << "<text x='" << (left + right) / 2 << "' y='" << bottom + 36
      << "' font-size='12' text-anchor='middle'>t</text>\n";
  out << "<text x='" << x0 + 14 << "' y='" << (top + bottom) / 2 << "' font-size='12' transform='rotate(-90 "
      << x0 + 14 << ' ' << (top + bottom) / 2 << ")' text-anchor='middle'>" << xml_escape(spec.y)
      << "</text>\n";
  if (!heading.empty()) {
    out << "<text x='" << (left + right) / 2 << "' y='" << top - 10
        << "' font-size='13' text-anchor='middle'>" << xml_escape(heading) << "</text>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = *series[i];
    const char* color = kPalette[(color_offset + i) % std::size(kPalette)];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.4' points='";
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      if (log && !(s.t[k] > 0.0 && s.y[k] > 0.0)) continue;
      out << ax.map(s.t[k]) << ',' << ay.map(s.y[k]) << ' ';
    }
    out << "'/>\n";
    if (const auto& fit = s.source->fit) {
      // Power law over its own window only.
      out << "<polyline fill='none' stroke='#000' stroke-width='1.2' stroke-dasharray='6,4' points='";
      const int n = 48;
      for (int k = 0; k <= n; ++k) {
        const double t = log ? fit->t_lo * std::pow(fit->t_hi / fit->t_lo, double(k) / n)
                             : fit->t_lo + (fit->t_hi - fit->t_lo) * k / n;
        out << ax.map(t) << ',' << ay.map(fit->prefactor * std::pow(t, fit->exponent)) << ' ';
      }
      out << "'/>\n";
    }
    if (series.size() > 1) {
      const double ly = top + 16 + 16 * static_cast<double>(i);
      out << "<line x1='" << right - 120 << "' y1='" << ly - 4 << "' x2='" << right - 100 << "' y2='"
          << ly - 4 << "' stroke='" << color << "' stroke-width='2'/><text x='" << right - 95
          << "' y='" << ly << "' font-size='11'>" << xml_escape(s.source->label) << "</text>\n";
    }
  }
}

}  // namespace detail

inline void render_svg(std::ostream& out, const PlotSpec& spec) {
  if (spec.series.empty()) throw ConfigError("plot has no series");
  std::vector<detail::LoadedSeries> loaded;
  for (const auto& s : spec.series) {
    const auto table = CsvTable::read(s.path);
    detail::LoadedSeries l{table.column("t"), table.column(spec.y), &s};
    if (l.t.empty()) throw ConfigError("series " + s.path.string() + " is empty");
    loaded.push_back(std::move(l));
  }

  const bool grid = spec.layout == PlotLayout::grid && loaded.size() > 1;
  const std::size_t cols = grid ? 2 : 1;
  const std::size_t rows = grid ? (loaded.size() + 1) / 2 : 1;
  const double pw = 420, ph = 320, title_h = spec.title.empty() ? 0 : 28;
  const double width = pw * static_cast<double>(cols), height = ph * static_cast<double>(rows) + title_h;

  out << "<?xml version='1.0' encoding='UTF-8'?>\n"
      << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << ' ' << height << "' font-family='sans-serif'>\n"
      << "<rect width='100%' height='100%' fill='#fff'/>\n";
  if (!spec.title.empty()) {
    out << "<text x='" << width / 2 << "' y='20' font-size='15' text-anchor='middle'>"
        << detail::xml_escape(spec.title) << "</text>\n";
  }
  if (grid) {
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      const double x0 = pw * static_cast<double>(i % cols), y0 = title_h + ph * static_cast<double>(i / cols);
      const char label = static_cast<char>('a' + i);
      detail::draw_panel(out, {&loaded[i]}, i, x0, y0, pw, ph, spec,
                         std::string("(") + label + ") " + loaded[i].source->label);
    }
  } else {
    std::vector<const detail::LoadedSeries*> all;
    for (const auto& l : loaded) all.push_back(&l);
    detail::draw_panel(out, all, 0, 0, title_h, pw, ph, spec,
                       loaded.size() == 1 ? loaded[0].source->label : "");
  }
  out << "</svg>\n";
}

inline void render_svg_file(const PlotSpec& spec) {
  std::ostringstream svg;
  render_svg(svg, spec);
  write_file(spec.output, [&](std::ostream& out) { out << svg.str(); });
}

}  // namespace qdiff
