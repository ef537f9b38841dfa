#include "adaptix/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace adaptix::svg {

namespace {

constexpr double kLeft = 58.0;
constexpr double kRight = 12.0;
constexpr double kTop = 26.0;
constexpr double kBottom = 42.0;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Rect plot_area(const Rect& f) { return {f.x + kLeft, f.y + kTop, f.w - kLeft - kRight, f.h - kTop - kBottom}; }

double tx(double v, bool log) { return log ? std::log10(v) : v; }

std::string group_open(const Rect& area, const Range& r, bool logx, bool logy) {
  return "<g class=\"panel\" data-area=\"" + num(area.x) + " " + num(area.y) + " " + num(area.w) + " " + num(area.h) +
         "\" data-x0=\"" + num(r.x0) + "\" data-x1=\"" + num(r.x1) + "\" data-y0=\"" + num(r.y0) + "\" data-y1=\"" +
         num(r.y1) + "\" data-logx=\"" + (logx ? "1" : "0") + "\" data-logy=\"" + (logy ? "1" : "0") + "\">\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11) {
  return "<text x=\"" + short_num(x) + "\" y=\"" + short_num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\" font-family=\"sans-serif\">" + escape(s) + "</text>\n";
}

std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> out;
  if (log) {
    for (double e = std::ceil(lo - 1e-9); e <= hi + 1e-9; e += 1.0) out.push_back(e);
    return out;
  }
  for (int i = 0; i <= 4; ++i) out.push_back(lo + (hi - lo) * i / 4.0);
  return out;
}

}  // namespace

double to_pixel_x(double x, const Rect& f, const Range& r, bool logx) {
  return f.x + (tx(x, logx) - r.x0) / (r.x1 - r.x0) * f.w;
}
double to_pixel_y(double y, const Rect& f, const Range& r, bool logy) {
  return f.y + f.h - (tx(y, logy) - r.y0) / (r.y1 - r.y0) * f.h;
}
double from_pixel_x(double px, const Rect& f, const Range& r, bool logx) {
  const double v = r.x0 + (px - f.x) / f.w * (r.x1 - r.x0);
  return logx ? std::pow(10.0, v) : v;
}
double from_pixel_y(double py, const Rect& f, const Range& r, bool logy) {
  const double v = r.y0 + (f.y + f.h - py) / f.h * (r.y1 - r.y0);
  return logy ? std::pow(10.0, v) : v;
}

std::string colormap(double t) {
  static constexpr double stops[5][3] = {
      {0, 0, 4}, {59, 15, 112}, {140, 41, 129}, {222, 73, 104}, {252, 253, 191}};
  if (!(t > 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double s = t * 4.0;
  const int i = std::min(3, static_cast<int>(s));
  const double u = s - i;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[i][c] + u * (stops[i + 1][c] - stops[i][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::line_panel(const Rect& frame, const Axes& axes, const std::vector<Series>& series, const Range* range) {
  Range r;
  if (range != nullptr) {
    r = *range;
  } else {
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : series) {
      for (double x : s.x)
        if (std::isfinite(tx(x, axes.logx))) {
          xlo = std::min(xlo, tx(x, axes.logx));
          xhi = std::max(xhi, tx(x, axes.logx));
        }
      for (double y : s.y)
        if (std::isfinite(tx(y, axes.logy))) {
          ylo = std::min(ylo, tx(y, axes.logy));
          yhi = std::max(yhi, tx(y, axes.logy));
        }
    }
    if (!(xhi > xlo)) {
      xlo -= 1.0;
      xhi += 1.0;
    }
    if (!(yhi > ylo)) {
      ylo -= 1.0;
      yhi += 1.0;
    }
    const double py = 0.05 * (yhi - ylo);
    r = {xlo, xhi, ylo - py, yhi + py};
  }
  const Rect a = plot_area(frame);
  body_ += group_open(a, r, axes.logx, axes.logy);
  body_ += "<rect x=\"" + short_num(a.x) + "\" y=\"" + short_num(a.y) + "\" width=\"" + short_num(a.w) +
           "\" height=\"" + short_num(a.h) + "\" fill=\"white\" stroke=\"#444\"/>\n";
  for (double t : ticks(r.x0, r.x1, axes.logx)) {
    const double px = a.x + (t - r.x0) / (r.x1 - r.x0) * a.w;
    body_ += "<line x1=\"" + short_num(px) + "\" y1=\"" + short_num(a.y + a.h) + "\" x2=\"" + short_num(px) +
             "\" y2=\"" + short_num(a.y + a.h + 4) + "\" stroke=\"#444\"/>\n";
    body_ += text(px, a.y + a.h + 15, axes.logx ? "1e" + short_num(t) : short_num(t), "middle", 9);
  }
  for (double t : ticks(r.y0, r.y1, axes.logy)) {
    const double py = a.y + a.h - (t - r.y0) / (r.y1 - r.y0) * a.h;
    body_ += "<line x1=\"" + short_num(a.x - 4) + "\" y1=\"" + short_num(py) + "\" x2=\"" + short_num(a.x) +
             "\" y2=\"" + short_num(py) + "\" stroke=\"#444\"/>\n";
    body_ += text(a.x - 6, py + 3, axes.logy ? "1e" + short_num(t) : short_num(t), "end", 9);
  }
  body_ += text(a.x + a.w / 2, frame.y + 16, axes.title, "middle", 12);
  body_ += text(a.x + a.w / 2, a.y + a.h + 32, axes.xlabel);
  body_ += "<text transform=\"translate(" + short_num(frame.x + 14) + "," + short_num(a.y + a.h / 2) +
           ") rotate(-90)\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
           escape(axes.ylabel) + "</text>\n";

  double legend_y = a.y + 14;
  for (const auto& s : series) {
    if (s.markers) {
      body_ += "<g class=\"series\" data-label=\"" + escape(s.label) + "\" fill=\"" + s.color + "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        body_ += "<circle cx=\"" + num(to_pixel_x(s.x[i], a, r, axes.logx)) + "\" cy=\"" +
                 num(to_pixel_y(s.y[i], a, r, axes.logy)) + "\" r=\"1.6\"/>\n";
      body_ += "</g>\n";
    } else {
      body_ += "<polyline class=\"series\" data-label=\"" + escape(s.label) + "\" fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i > 0) body_ += ' ';
        body_ += num(to_pixel_x(s.x[i], a, r, axes.logx)) + "," + num(to_pixel_y(s.y[i], a, r, axes.logy));
      }
      body_ += "\"/>\n";
    }
    if (!s.label.empty()) {
      body_ += "<rect x=\"" + short_num(a.x + a.w - 120) + "\" y=\"" + short_num(legend_y - 8) +
               "\" width=\"10\" height=\"8\" fill=\"" + s.color + "\"/>\n";
      body_ += text(a.x + a.w - 106, legend_y, s.label, "start", 9);
      legend_y += 12;
    }
  }
  body_ += "</g>\n";
}

void Document::heatmap_panel(const Rect& frame, const std::string& title, const Heatmap& m,
                             const std::vector<double>& scatter_xy) {
  const Rect a = plot_area(frame);
  // square cells: fit the lattice into the plot area
  const double side = std::min(a.w, a.h);
  const Rect sq{a.x + (a.w - side) / 2, a.y + (a.h - side) / 2, side, side};
  const Range r{m.x0, m.x1, m.y0, m.y1};
  body_ += group_open(sq, r, false, false);
  body_ += text(sq.x + side / 2, frame.y + 16, title, "middle", 12);
  const double cw = side / static_cast<double>(m.nx);
  const double ch = side / static_cast<double>(m.ny);
  const double span = m.vmax > m.vmin ? m.vmax - m.vmin : 1.0;
  for (std::size_t row = 0; row < m.ny; ++row)
    for (std::size_t col = 0; col < m.nx; ++col) {
      const double v = m.values[row * m.nx + col];
      if (!std::isfinite(v)) continue;
      const double px = sq.x + cw * static_cast<double>(col);
      const double py = sq.y + side - ch * static_cast<double>(row + 1);
      body_ += "<rect x=\"" + short_num(px) + "\" y=\"" + short_num(py) + "\" width=\"" + short_num(cw + 0.05) +
               "\" height=\"" + short_num(ch + 0.05) + "\" fill=\"" + colormap((v - m.vmin) / span) + "\" data-v=\"" +
               num(v) + "\"/>\n";
    }
  if (!scatter_xy.empty()) {
    body_ += "<g class=\"samples\" fill=\"#2ca02c\" stroke=\"none\">\n";
    for (std::size_t i = 0; i + 1 < scatter_xy.size(); i += 2)
      body_ += "<circle cx=\"" + num(to_pixel_x(scatter_xy[i], sq, r, false)) + "\" cy=\"" +
               num(to_pixel_y(scatter_xy[i + 1], sq, r, false)) + "\" r=\"1.3\"/>\n";
    body_ += "</g>\n";
  }
  body_ += "</g>\n";
}

std::string Document::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         short_num(width_) + "\" height=\"" + short_num(height_) + "\" viewBox=\"0 0 " + short_num(width_) + " " +
         short_num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

}  // namespace adaptix::svg
