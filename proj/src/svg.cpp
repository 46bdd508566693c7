#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "advlin/cli.hpp"

// Hand-rolled static SVG line plots: axes, ticks, one polyline per series,
// an optional dashed vertical marker, and a small legend.  No styling
// ambitions beyond being readable in a browser.

namespace advlin::cli {

namespace {

constexpr double width = 720.0;
constexpr double height = 480.0;
constexpr double ml = 70.0, mr = 20.0, mt = 40.0, mb = 55.0;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::size_t column_index(const result_table& t, const std::string& name) {
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (t.columns[j] == name) return j;
  throw std::invalid_argument("emit_svg: no column named '" + name + "'");
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string emit_svg(const result_table& table, const svg_options& opts) {
  if (table.rows.empty())
    throw std::invalid_argument("emit_svg: empty table");
  if (opts.y_columns.empty())
    throw std::invalid_argument("emit_svg: no series selected");

  const std::size_t xc = column_index(table, opts.x_column);
  std::vector<std::size_t> ycs;
  for (const auto& name : opts.y_columns)
    ycs.push_back(column_index(table, name));

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& row : table.rows) {
    const double x = row[xc];
    if (!std::isfinite(x)) continue;
    if (opts.log_x && x <= 0.0)
      throw std::invalid_argument(
          "emit_svg: log-x requires strictly positive x values");
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (std::size_t yc : ycs) {
      const double y = row[yc];
      if (!std::isfinite(y)) continue;
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw std::invalid_argument("emit_svg: no finite data to plot");
  if (opts.vline && std::isfinite(*opts.vline)) {
    if (!opts.log_x || *opts.vline > 0.0) {
      xmin = std::min(xmin, *opts.vline);
      xmax = std::max(xmax, *opts.vline);
    }
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const auto tx = [&](double x) {
    const double lo = opts.log_x ? std::log10(xmin) : xmin;
    const double hi = opts.log_x ? std::log10(xmax) : xmax;
    const double v = opts.log_x ? std::log10(x) : x;
    return ml + (v - lo) / (hi - lo) * (width - ml - mr);
  };
  const auto ty = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << escape(opts.title) << "</text>\n";

  // frame
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
      << width - ml - mr << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // ticks
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double f = static_cast<double>(i) / nticks;
    double xv;
    if (opts.log_x)
      xv = std::pow(10.0,
                    std::log10(xmin) + f * (std::log10(xmax) - std::log10(xmin)));
    else
      xv = xmin + f * (xmax - xmin);
    const double px = tx(xv);
    svg << "<line x1=\"" << px << "\" y1=\"" << height - mb << "\" x2=\"" << px
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(xv) << "</text>\n";
    const double yv = ymin + f * (ymax - ymin);
    const double py = ty(yv);
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml
        << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(yv) << "</text>\n";
  }

  // axis labels
  if (!opts.x_label.empty())
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << escape(opts.x_label) << (opts.log_x ? " (log scale)" : "")
        << "</text>\n";
  if (!opts.y_label.empty())
    svg << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">" << escape(opts.y_label)
        << "</text>\n";

  // vertical marker
  if (opts.vline && std::isfinite(*opts.vline) &&
      (!opts.log_x || *opts.vline > 0.0)) {
    const double px = tx(*opts.vline);
    svg << "<line x1=\"" << px << "\" y1=\"" << mt << "\" x2=\"" << px
        << "\" y2=\"" << height - mb
        << "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n";
  }

  // series: break polylines at non-finite points
  for (std::size_t s = 0; s < ycs.size(); ++s) {
    const char* color = palette[s % (sizeof(palette) / sizeof(palette[0]))];
    std::vector<std::string> segments;
    std::string seg;
    for (const auto& row : table.rows) {
      const double x = row[xc];
      const double y = row[ycs[s]];
      if (!std::isfinite(x) || !std::isfinite(y)) {
        if (!seg.empty()) segments.push_back(std::move(seg));
        seg.clear();
        continue;
      }
      seg += num(tx(x)) + "," + num(ty(y)) + " ";
    }
    if (!seg.empty()) segments.push_back(std::move(seg));
    for (const auto& pts : segments)
      svg << "<polyline points=\"" << pts
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
    // legend
    const double lx = width - mr - 170.0;
    const double ly = mt + 16.0 + 16.0 * static_cast<double>(s);
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\""
        << lx + 24 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"/>\n";
    svg << "<text x=\"" << lx + 30 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(opts.y_columns[s]) << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace advlin::cli
