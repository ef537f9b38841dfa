#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace adaptix::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;  // scatter instead of polyline
  bool dashed = false;
};

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct Axes {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
};

/// Data range of a panel (already in log10 units for log axes).
struct Range {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

/// Piecewise-linear dark-to-light colormap on [0, 1] as "#rrggbb".
std::string colormap(double t);

/// Heatmap cells: values[row * nx + col], rows bottom to top; NaN cells are
/// left blank.
struct Heatmap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double x0 = -1.0;
  double x1 = 1.0;
  double y0 = -1.0;
  double y1 = 1.0;
  std::vector<double> values;
  double vmin = 0.0;
  double vmax = 1.0;
};

/// Static SVG 1.1 document built panel by panel. Every plotted element carries
/// its panel's data range (data-x0 ... data-y1 on the panel group) so numeric
/// content can be recovered from pixel coordinates.
class Document {
 public:
  Document(double width, double height);

  /// Line/scatter panel; the range is computed from the series unless given.
  void line_panel(const Rect& frame, const Axes& axes, const std::vector<Series>& series,
                  const Range* range = nullptr);

  void heatmap_panel(const Rect& frame, const std::string& title, const Heatmap& map,
                     const std::vector<double>& scatter_xy = {});

  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Pixel <-> data maps used by Document (exposed for round-trip checks).
double to_pixel_x(double x, const Rect& frame, const Range& r, bool logx);
double to_pixel_y(double y, const Rect& frame, const Range& r, bool logy);
double from_pixel_x(double px, const Rect& frame, const Range& r, bool logx);
double from_pixel_y(double py, const Rect& frame, const Range& r, bool logy);

}  // namespace adaptix::svg
