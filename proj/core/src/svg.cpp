#include "stylespace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "stylespace/error.hpp"

namespace stylespace::svg {
namespace {

constexpr const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
                                    "#aa3377", "#bbbbbb", "#000000", "#ee7733", "#009988"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string open(double w, double h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      w, h, w, h);
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
  return fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n", x, y, anchor,
                     size, escape(s));
}

}  // namespace

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

std::string bar_chart(const std::string& title, const std::vector<std::string>& series,
                      const std::vector<BarGroup>& groups, const std::string& y_label) {
  const double bar_w = 14.0;
  const double group_gap = 24.0;
  const double left = 70.0;
  const double top = 40.0;
  const double plot_h = 260.0;
  const double group_w = bar_w * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + group_gap;
  const double width = left + group_w * static_cast<double>(std::max<std::size_t>(groups.size(), 1)) + 150.0;
  const double height = top + plot_h + 80.0;

  double lo = 0.0;
  double hi = 0.0;
  for (const auto& g : groups) {
    for (const auto& v : g.values) {
      if (!v) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.1 * (hi - lo);
  hi += pad;
  if (lo < 0.0) lo -= pad;
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::string s = open(width, height);
  s += text(width / 2.0, 20.0, title, "middle", 14);
  s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", left, top,
                   left, top + plot_h);
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", left - 4,
                     y_of(v), left, y_of(v));
    s += text(left - 6, y_of(v) + 4, fmt::format("{:.3f}", v), "end", 10);
  }
  s += fmt::format("<text x=\"16\" y=\"{:.2f}\" transform=\"rotate(-90 16 {:.2f})\" text-anchor=\"middle\">{}</text>\n",
                   top + plot_h / 2, top + plot_h / 2, escape(y_label));
  const double zero = y_of(0.0);
  s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#444\"/>\n", left, zero,
                   width - 150.0, zero);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double gx = left + group_gap / 2.0 + group_w * static_cast<double>(gi);
    for (std::size_t si = 0; si < g.values.size(); ++si) {
      if (!g.values[si]) continue;
      const double v = *g.values[si];
      const double x = gx + bar_w * static_cast<double>(si);
      const double y = std::min(y_of(v), zero);
      const double h = std::abs(y_of(v) - zero);
      s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
                       bar_w - 1.0, h, colour(si));
      if (si < g.marked.size() && g.marked[si]) {
        const double ty = v >= 0.0 ? y - 3.0 : y + h + 11.0;
        s += text(x + bar_w / 2.0, ty, "*", "middle", 12);
      }
    }
    s += text(gx + bar_w * static_cast<double>(g.values.size()) / 2.0, top + plot_h + 18.0, g.label, "middle", 11);
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double y = top + 16.0 * static_cast<double>(si);
    s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", width - 140.0, y,
                     colour(si));
    s += text(width - 125.0, y + 9.0, series[si], "start", 11);
  }
  s += "</svg>\n";
  return s;
}

std::string scatter(const std::string& title, const Matrix& points, const std::vector<std::string>& classes,
                    const std::map<std::string, Ellipse>& ellipses) {
  if (points.cols() != 2) throw Error(ErrorKind::kDimensionMismatch, "scatter needs 2D points");
  if (classes.size() != points.rows()) throw Error(ErrorKind::kDimensionMismatch, "one class per point required");
  const double size = 480.0;
  const double margin = 40.0;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    xmin = std::min(xmin, points(i, 0));
    xmax = std::max(xmax, points(i, 0));
    ymin = std::min(ymin, points(i, 1));
    ymax = std::max(ymax, points(i, 1));
  }
  for (const auto& [cls, e] : ellipses) {
    const double r = e.semi_major;
    xmin = std::min(xmin, e.center[0] - r);
    xmax = std::max(xmax, e.center[0] + r);
    ymin = std::min(ymin, e.center[1] - r);
    ymax = std::max(ymax, e.center[1] + r);
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double scale = (size - 2 * margin) / std::max(xmax - xmin, ymax - ymin);
  auto px = [&](double x) { return margin + (x - xmin) * scale; };
  auto py = [&](double y) { return size - margin - (y - ymin) * scale; };

  std::set<std::string> names(classes.begin(), classes.end());
  for (const auto& [cls, e] : ellipses) names.insert(cls);
  std::map<std::string, std::size_t> index;
  for (const auto& n : names) index.emplace(n, index.size());

  std::string s = open(size + 170.0, size);
  s += text(size / 2.0, 20.0, title, "middle", 14);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.6\"/>\n",
                     px(points(i, 0)), py(points(i, 1)), colour(index[classes[i]]));
  }
  for (const auto& [cls, e] : ellipses) {
    const double deg = -e.angle * 180.0 / std::numbers::pi;
    s += fmt::format(
        "<ellipse cx=\"{:.2f}\" cy=\"{:.2f}\" rx=\"{:.2f}\" ry=\"{:.2f}\" transform=\"rotate({:.3f} {:.2f} {:.2f})\" "
        "fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        px(e.center[0]), py(e.center[1]), e.semi_major * scale, e.semi_minor * scale, deg, px(e.center[0]),
        py(e.center[1]), colour(index[cls]));
  }
  double ly = 40.0;
  for (const auto& [name, i] : index) {
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"{}\"/>\n", size + 10.0, ly, colour(i));
    s += text(size + 20.0, ly + 4.0, name, "start", 11);
    ly += 18.0;
  }
  s += "</svg>\n";
  return s;
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.size() != row_labels.size()) throw Error(ErrorKind::kDimensionMismatch, "heatmap rows differ from labels");
  const double cell = 64.0;
  const double left = 130.0;
  const double top = 70.0;
  const double width = left + cell * static_cast<double>(col_labels.size()) + 20.0;
  const double height = top + cell * static_cast<double>(row_labels.size()) + 50.0;
  std::string s = open(width, height);
  s += text(width / 2.0, 20.0, title, "middle", 14);
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    s += text(left + cell * (static_cast<double>(c) + 0.5), top - 8.0, col_labels[c], "middle", 11);
  }
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    if (counts[r].size() != col_labels.size()) throw Error(ErrorKind::kDimensionMismatch, "heatmap row width differs");
    std::size_t total = 0;
    for (auto v : counts[r]) total += v;
    s += text(left - 8.0, top + cell * (static_cast<double>(r) + 0.5) + 4.0, row_labels[r], "end", 11);
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const double frac = total ? static_cast<double>(counts[r][c]) / static_cast<double>(total) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - frac)));
      const double x = left + cell * static_cast<double>(c);
      const double y = top + cell * static_cast<double>(r);
      s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"rgb({},{},255)\" "
                       "stroke=\"white\"/>\n",
                       x, y, cell, cell, shade, shade);
      s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" fill=\"{}\">{}</text>\n", x + cell / 2,
                       y + cell / 2 + 4, frac > 0.5 ? "white" : "black", counts[r][c]);
    }
  }
  s += text(left + cell * static_cast<double>(col_labels.size()) / 2.0, height - 15.0, "predicted", "middle", 11);
  s += "</svg>\n";
  return s;
}

}  // namespace stylespace::svg
