#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "commands.hpp"

namespace ecgsec::cli {

namespace {

constexpr int kWidth = 900;
constexpr int kPanelHeight = 140;
constexpr int kMargin = 40;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_line_svg(const std::vector<Series>& panels, std::string_view title) {
  const int height = kMargin + static_cast<int>(panels.size()) * (kPanelHeight + kMargin);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\">\n<style>.trace{fill:none;stroke:#1f4e99;stroke-width:1}"
         ".frame{fill:none;stroke:#999}text{font:12px sans-serif}</style>\n"
      << "<text x=\"" << kMargin << "\" y=\"20\">" << escape(title) << "</text>\n";
  const double plot_w = kWidth - 2.0 * kMargin;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& series = panels[p];
    const double top = kMargin + static_cast<double>(p) * (kPanelHeight + kMargin);
    svg << "<rect class=\"frame\" x=\"" << kMargin << "\" y=\"" << fmt(top) << "\" width=\""
        << fmt(plot_w) << "\" height=\"" << kPanelHeight << "\"/>\n"
        << "<text x=\"" << kMargin << "\" y=\"" << fmt(top - 4) << "\">" << escape(series.name)
        << "</text>\n";
    if (series.values.empty()) continue;
    const auto [lo_it, hi_it] = std::minmax_element(series.values.begin(), series.values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(series.values.size() - 1, 1));
    svg << "<polyline class=\"trace\" points=\"";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
      const double x = kMargin + plot_w * static_cast<double>(i) / n;
      const double y = top + kPanelHeight * (1.0 - (series.values[i] - lo) / (hi - lo));
      svg << (i ? " " : "") << fmt(x) << ',' << fmt(y);
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_histogram_svg(const Histogram256& hist, std::string_view title) {
  const int height = kPanelHeight * 2 + 2 * kMargin;
  const double plot_w = kWidth - 2.0 * kMargin;
  const double plot_h = kPanelHeight * 2.0;
  const double bar_w = plot_w / 256.0;
  const auto peak = std::max<std::uint64_t>(*std::max_element(hist.begin(), hist.end()), 1);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\">\n<style>.bar{fill:#c0504d}text{font:12px sans-serif}</style>\n"
      << "<text x=\"" << kMargin << "\" y=\"20\">" << escape(title) << " (max " << peak
      << ")</text>\n";
  for (std::size_t v = 0; v < hist.size(); ++v) {
    const double h = plot_h * static_cast<double>(hist[v]) / static_cast<double>(peak);
    svg << "<rect class=\"bar\" x=\"" << fmt(kMargin + bar_w * static_cast<double>(v))
        << "\" y=\"" << fmt(kMargin + plot_h - h) << "\" width=\"" << fmt(bar_w) << "\" height=\""
        << fmt(h) << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ecgsec::cli
