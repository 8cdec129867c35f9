#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace krylovreg {

/// Minimal self-contained SVG line chart with a logarithmic y axis; one
/// polyline per named series, values below 1e-300 are clipped.
class SvgLineChart {
 public:
  SvgLineChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(const std::string& label, const std::vector<double>& values) {
    series_.push_back({label, values});
  }

  bool empty() const { return series_.empty(); }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("SvgLineChart::write: cannot open " + path);
    out << render();
  }

  std::string render() const {
    const double width = 760, height = 520;
    const double left = 70, right = 190, top = 46, bottom = 56;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::size_t max_len = 1;
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : series_) {
      max_len = std::max(max_len, s.values.size());
      for (double v : s.values) {
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
    if (ymin > ymax) {
      ymin = 1e-1;
      ymax = 1e1;
    }
    double lo = std::floor(std::log10(ymin));
    double hi = std::ceil(std::log10(ymax));
    if (hi - lo < 1.0) hi = lo + 1.0;

    auto xpos = [&](std::size_t i) {
      return left + plot_w * (max_len > 1 ? static_cast<double>(i) / (max_len - 1) : 0.5);
    };
    auto ypos = [&](double v) {
      const double lv = std::log10(std::max(v, 1e-300));
      return top + plot_h * (1.0 - (lv - lo) / (hi - lo));
    };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
        << "font-family=\"sans-serif\">" << title_ << "</text>\n";

    // frame and log gridlines
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = lo; d <= hi + 0.5; d += 1.0) {
      const double y = ypos(std::pow(10.0, d));
      svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\""
          << y << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e"
          << static_cast<int>(d) << "</text>\n";
    }
    const std::size_t xticks = std::min<std::size_t>(10, max_len);
    for (std::size_t t = 0; t < xticks; ++t) {
      const std::size_t i = t * (max_len - 1) / std::max<std::size_t>(1, xticks - 1);
      svg << "<text x=\"" << xpos(i) << "\" y=\"" << top + plot_h + 18
          << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << i + 1
          << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label_
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
        << "transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">" << y_label_ << "</text>\n";

    for (std::size_t s = 0; s < series_.size(); ++s) {
      const char* color = kColors[s % 8];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i = 0; i < series_[s].values.size(); ++i) {
        const double v = series_[s].values[i];
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        svg << xpos(i) << "," << ypos(v) << " ";
      }
      svg << "\"/>\n";
      const double ly = top + 16 + 18 * static_cast<double>(s);
      svg << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
          << left + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << series_[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
  }

 private:
  struct Series {
    std::string label;
    std::vector<double> values;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace krylovreg
