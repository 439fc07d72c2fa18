#include "rgbt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rgbt/common.hpp"

namespace rgbt {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 160;  // legend column
constexpr int kMarginTop = 44;
constexpr int kMarginBottom = 56;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#2e8b57", "#e0a100",
                          "#7451a5", "#00838f", "#b35a22", "#5d5d5d"};
constexpr int kPaletteSize = 8;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

// Tick step from the 1-2-5 ladder giving at most ~6 intervals.
double nice_step(double range) {
  if (range <= 0.0) return 1.0;
  double raw = range / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag + 1e-12) return m * mag;
  }
  return 10.0 * mag;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  double step = 0.2;
};

Axis fit_axis(double lo, double hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  double step = nice_step(hi - lo);
  Axis a;
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  a.step = step;
  return a;
}

std::string tick_label(double v) {
  double r = std::round(v);
  if (std::fabs(v - r) < 1e-9) return format_fixed(r, 0);
  return format_fixed(v, 2);
}

class SvgFile {
 public:
  explicit SvgFile(const std::filesystem::path& path) : out_(path) {
    if (!out_)
      throw std::runtime_error("cannot write plot: " + path.string());
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
         << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
         << kHeight << "\">\n";
    out_ << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" fill=\"white\"/>\n";
  }
  ~SvgFile() { out_ << "</svg>\n"; }

  std::ofstream& raw() { return out_; }

  void text(double x, double y, const std::string& s, int size,
            const char* anchor, const char* extra = "") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y)
         << "\" font-family=\"sans-serif\" font-size=\"" << size
         << "\" text-anchor=\"" << anchor << "\"" << extra << ">" << escape(s)
         << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* stroke,
            const char* extra = "") {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
         << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke
         << "\"" << extra << "/>\n";
  }

 private:
  std::ofstream out_;
};

struct Frame {
  Axis x, y;
  double px0, px1, py0, py1;  // plot rectangle, py0 is the TOP edge

  double sx(double v) const {
    return px0 + (v - x.lo) / (x.hi - x.lo) * (px1 - px0);
  }
  double sy(double v) const {
    return py1 - (v - y.lo) / (y.hi - y.lo) * (py1 - py0);
  }
};

void draw_frame(SvgFile& svg, const Frame& f, const std::string& title,
                const std::string& x_label, const std::string& y_label,
                bool draw_x_ticks) {
  svg.text(kWidth / 2.0, kMarginTop - 18, title, 16, "middle");
  for (double v = f.y.lo; v <= f.y.hi + 1e-9; v += f.y.step) {
    double y = f.sy(v);
    svg.line(f.px0, y, f.px1, y, "#dddddd");
    svg.text(f.px0 - 8, y + 4, tick_label(v), 11, "end");
  }
  if (draw_x_ticks) {
    for (double v = f.x.lo; v <= f.x.hi + 1e-9; v += f.x.step) {
      double x = f.sx(v);
      svg.line(x, f.py1, x, f.py1 + 4, "#444444");
      svg.text(x, f.py1 + 18, tick_label(v), 11, "middle");
    }
  }
  svg.line(f.px0, f.py0, f.px0, f.py1, "#444444");
  svg.line(f.px0, f.py1, f.px1, f.py1, "#444444");
  svg.text((f.px0 + f.px1) / 2.0, kHeight - 14, x_label, 13, "middle");
  svg.raw() << "<text x=\"18\" y=\"" << num((f.py0 + f.py1) / 2.0)
            << "\" font-family=\"sans-serif\" font-size=\"13\" "
               "text-anchor=\"middle\" transform=\"rotate(-90 18 "
            << num((f.py0 + f.py1) / 2.0) << ")\">" << escape(y_label)
            << "</text>\n";
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec) {
  if (spec.series.empty())
    throw std::invalid_argument("write_line_plot: no series");
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool first = true;
  for (const auto& s : spec.series) {
    if (s.xs.size() != s.ys.size())
      throw std::invalid_argument("write_line_plot: series " + s.label +
                                  " has mismatched lengths");
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (first) {
        x_lo = x_hi = s.xs[i];
        y_lo = y_hi = s.ys[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.xs[i]);
      x_hi = std::max(x_hi, s.xs[i]);
      y_lo = std::min(y_lo, s.ys[i]);
      y_hi = std::max(y_hi, s.ys[i]);
    }
  }
  if (first) throw std::invalid_argument("write_line_plot: empty series");
  if (spec.y_min < spec.y_max) {
    y_lo = spec.y_min;
    y_hi = spec.y_max;
  }

  Frame f;
  f.x = fit_axis(x_lo, x_hi);
  f.y = fit_axis(y_lo, y_hi);
  f.px0 = kMarginLeft;
  f.px1 = kWidth - kMarginRight;
  f.py0 = kMarginTop;
  f.py1 = kHeight - kMarginBottom;

  SvgFile svg(path);
  draw_frame(svg, f, spec.title, spec.x_label, spec.y_label, true);

  for (size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kPalette[si % kPaletteSize];
    if (!s.xs.empty()) {
      svg.raw() << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\" points=\"";
      for (size_t i = 0; i < s.xs.size(); ++i) {
        if (i) svg.raw() << ' ';
        svg.raw() << num(f.sx(s.xs[i])) << ',' << num(f.sy(s.ys[i]));
      }
      svg.raw() << "\"/>\n";
      for (size_t i = 0; i < s.xs.size(); ++i)
        svg.raw() << "<circle cx=\"" << num(f.sx(s.xs[i])) << "\" cy=\""
                  << num(f.sy(s.ys[i])) << "\" r=\"2.5\" fill=\"" << color
                  << "\"/>\n";
    }
    double ly = kMarginTop + 16 + 20.0 * static_cast<double>(si);
    svg.line(f.px1 + 12, ly - 4, f.px1 + 34, ly - 4, color,
             " stroke-width=\"3\"");
    svg.text(f.px1 + 40, ly, s.label, 12, "start");
  }
}

void write_bar_plot(const std::filesystem::path& path, const BarSpec& spec) {
  if (spec.labels.size() != spec.values.size() || spec.labels.empty())
    throw std::invalid_argument("write_bar_plot: bad labels/values");

  double y_lo = 0.0;
  double y_hi = *std::max_element(spec.values.begin(), spec.values.end());
  for (double v : spec.values) y_lo = std::min(y_lo, v);
  if (spec.y_min < spec.y_max) {
    y_lo = spec.y_min;
    y_hi = spec.y_max;
  }

  Frame f;
  f.x = {0.0, 1.0, 1.0};
  f.y = fit_axis(y_lo, y_hi);
  f.px0 = kMarginLeft;
  f.px1 = kWidth - 40;  // bars need no legend column
  f.py0 = kMarginTop;
  f.py1 = kHeight - kMarginBottom;

  SvgFile svg(path);
  draw_frame(svg, f, spec.title, "", spec.y_label, false);

  size_t n = spec.values.size();
  double slot = (f.px1 - f.px0) / static_cast<double>(n);
  double bar = slot * 0.64;
  for (size_t i = 0; i < n; ++i) {
    double cx = f.px0 + slot * (static_cast<double>(i) + 0.5);
    double top = f.sy(std::max(spec.values[i], f.y.lo));
    double base = f.sy(std::max(0.0, f.y.lo));
    if (top > base) std::swap(top, base);
    svg.raw() << "<rect x=\"" << num(cx - bar / 2.0) << "\" y=\"" << num(top)
              << "\" width=\"" << num(bar) << "\" height=\""
              << num(std::max(0.0, base - top)) << "\" fill=\""
              << kPalette[i % kPaletteSize] << "\"/>\n";
    svg.text(cx, f.py1 + 18, spec.labels[i], 11, "middle");
    svg.text(cx, top - 6, format_fixed(spec.values[i], 3), 11, "middle");
  }
}

}  // namespace rgbt
