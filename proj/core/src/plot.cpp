#include "sebcomm/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "sebcomm/errors.hpp"
#include "sebcomm/image_io.hpp"

namespace sebcomm {
namespace plot {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kBackground{255, 255, 255};
constexpr Rgb kAxis{40, 40, 40};
constexpr Rgb kGridline{225, 225, 225};
constexpr Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                            {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};
constexpr int kPaletteSize = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));

// 5x7 glyphs, row bits left-to-right in bits 4..0
struct Glyph {
  char ch;
  uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0, 0, 0, 0, 0, 0x0C, 0x0C}},
    {',', {0, 0, 0, 0, 0x0C, 0x04, 0x08}},
    {'-', {0, 0, 0, 0x1F, 0, 0, 0}},
    {'+', {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0}},
    {':', {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'=', {0, 0, 0x1F, 0, 0x1F, 0, 0}},
    {'_', {0, 0, 0, 0, 0, 0, 0x1F}},
    {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
    {'^', {0x04, 0x0A, 0x11, 0, 0, 0, 0}},
};

const uint8_t* glyph_rows(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  for (const Glyph& g : kFont)
    if (g.ch == c) return g.rows;
  return kFont[0].rows;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), rgb_(static_cast<size_t>(w) * h * 3) {
    for (size_t i = 0; i < rgb_.size(); i += 3) {
      rgb_[i] = kBackground.r;
      rgb_[i + 1] = kBackground.g;
      rgb_[i + 2] = kBackground.b;
    }
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
    size_t i = (static_cast<size_t>(y) * w_ + x) * 3;
    rgb_[i] = c.r;
    rgb_[i + 1] = c.g;
    rgb_[i + 2] = c.b;
  }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) set(x, y, c);
  }

  void line(int x0, int y0, int x1, int y1, Rgb c, int thick = 1) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      if (thick <= 1) {
        set(x0, y0, c);
      } else {
        fill_rect(x0 - thick / 2, y0 - thick / 2, x0 + thick / 2, y0 + thick / 2, c);
      }
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void text(int x, int y, const std::string& s, Rgb c, int scale = 1) {
    for (char ch : s) {
      const uint8_t* rows = glyph_rows(ch);
      for (int ry = 0; ry < 7; ++ry)
        for (int rx = 0; rx < 5; ++rx)
          if (rows[ry] & (1 << (4 - rx)))
            fill_rect(x + rx * scale, y + ry * scale, x + rx * scale + scale - 1,
                      y + ry * scale + scale - 1, c);
      x += 6 * scale;
    }
  }

  static int text_width(const std::string& s, int scale = 1) {
    return static_cast<int>(s.size()) * 6 * scale;
  }

  void save(const std::string& path) const { save_png_rgb8(path, rgb_, h_, w_); }

  int w() const { return w_; }
  int h() const { return h_; }

 private:
  int w_, h_;
  std::vector<unsigned char> rgb_;
};

std::string format_tick(double v) {
  char buf[48];
  double a = std::abs(v);
  if (v == 0.0)
    std::snprintf(buf, sizeof buf, "0");
  else if (a >= 1000.0 || a < 0.001)
    std::snprintf(buf, sizeof buf, "%.1e", v);
  else
    std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;

  void expand(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

double nice_step(double span, int target_ticks) {
  double raw = span / std::max(target_ticks, 1);
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10.0;
}

struct Frame {
  int left, right, top, bottom;  // plot rectangle in pixels
  Range xr, yr;

  int px(double x) const {
    return left + static_cast<int>(std::lround((x - xr.lo) / (xr.hi - xr.lo) * (right - left)));
  }
  int py(double y) const {
    return bottom - static_cast<int>(std::lround((y - yr.lo) / (yr.hi - yr.lo) * (bottom - top)));
  }
};

void draw_frame(Canvas& cv, const Frame& f, const std::string& title, const std::string& xlabel,
                const std::string& ylabel, bool x_ticks) {
  cv.text((cv.w() - Canvas::text_width(title, 2)) / 2, 12, title, kAxis, 2);
  cv.text(f.left - 75, f.top - 24, ylabel, kAxis);
  cv.text((f.left + f.right - Canvas::text_width(xlabel)) / 2, f.bottom + 36, xlabel, kAxis);

  const double ys = nice_step(f.yr.hi - f.yr.lo, 6);
  for (double v = std::ceil(f.yr.lo / ys) * ys; v <= f.yr.hi + 1e-12; v += ys) {
    int y = f.py(v);
    cv.line(f.left, y, f.right, y, kGridline);
    std::string t = format_tick(v);
    cv.text(f.left - 8 - Canvas::text_width(t), y - 3, t, kAxis);
    cv.line(f.left - 4, y, f.left, y, kAxis);
  }
  if (x_ticks) {
    const double xs = nice_step(f.xr.hi - f.xr.lo, 8);
    for (double v = std::ceil(f.xr.lo / xs) * xs; v <= f.xr.hi + 1e-12; v += xs) {
      int x = f.px(v);
      cv.line(x, f.top, x, f.bottom, kGridline);
      std::string t = format_tick(v);
      cv.text(x - Canvas::text_width(t) / 2, f.bottom + 8, t, kAxis);
      cv.line(x, f.bottom, x, f.bottom + 4, kAxis);
    }
  }
  cv.line(f.left, f.top, f.left, f.bottom, kAxis);
  cv.line(f.left, f.bottom, f.right, f.bottom, kAxis);
}

void draw_legend(Canvas& cv, const Frame& f, const std::vector<std::string>& labels) {
  int lw = 0;
  for (const auto& s : labels) lw = std::max(lw, Canvas::text_width(s));
  int x = f.right - lw - 30, y = f.top + 8;
  for (size_t i = 0; i < labels.size(); ++i) {
    Rgb c = kPalette[i % kPaletteSize];
    cv.fill_rect(x, y + 1, x + 12, y + 6, c);
    cv.text(x + 18, y, labels[i], kAxis);
    y += 14;
  }
}

}  // namespace

void lines(const std::string& path, const std::vector<Series>& series, const std::string& title,
           const std::string& xlabel, const std::string& ylabel) {
  if (series.empty()) throw ParameterError("plot: no series");
  Canvas cv(960, 640);
  Frame f{90, 930, 60, 560, {}, {}};
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ShapeError("plot: series x/y length mismatch");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        f.xr.lo = f.xr.hi = s.x[i];
        f.yr.lo = f.yr.hi = s.y[i];
        first = false;
      }
      f.xr.expand(s.x[i]);
      f.yr.expand(s.y[i]);
    }
  }
  if (first) throw ParameterError("plot: all series empty");
  f.xr.pad();
  f.yr.pad();
  draw_frame(cv, f, title, xlabel, ylabel, true);

  std::vector<std::string> labels;
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    Rgb c = kPalette[si % kPaletteSize];
    for (size_t i = 0; i + 1 < s.x.size(); ++i)
      cv.line(f.px(s.x[i]), f.py(s.y[i]), f.px(s.x[i + 1]), f.py(s.y[i + 1]), c, 2);
    for (size_t i = 0; i < s.x.size(); ++i)
      cv.fill_rect(f.px(s.x[i]) - 2, f.py(s.y[i]) - 2, f.px(s.x[i]) + 2, f.py(s.y[i]) + 2, c);
    labels.push_back(s.label.empty() ? "series " + std::to_string(si + 1) : s.label);
  }
  draw_legend(cv, f, labels);
  cv.save(path);
}

void stacked_bars(const std::string& path, const StackedBars& bars, const std::string& title,
                  const std::string& ylabel) {
  const size_t parts = bars.values.size();
  if (parts == 0 || parts != bars.part_labels.size())
    throw ParameterError("plot: bad stacked bar spec");
  const size_t groups = bars.values[0].size();
  if (groups == 0 || groups != bars.group_labels.size())
    throw ParameterError("plot: bad stacked bar groups");
  for (const auto& row : bars.values)
    if (row.size() != groups) throw ShapeError("plot: ragged stacked bar values");

  Canvas cv(960, 640);
  Frame f{90, 930, 60, 560, {}, {}};
  f.xr = {0.0, static_cast<double>(groups)};
  f.yr = {0.0, 0.0};
  for (size_t g = 0; g < groups; ++g) {
    double total = 0.0;
    for (size_t p = 0; p < parts; ++p) total += std::max(0.0, bars.values[p][g]);
    f.yr.expand(total);
  }
  if (f.yr.hi <= 0.0) f.yr.hi = 1.0;
  f.yr.hi *= 1.08;
  draw_frame(cv, f, title, "", ylabel, false);

  const double slot = 1.0;
  const double bar = 0.6;
  for (size_t g = 0; g < groups; ++g) {
    const double x0 = g * slot + (slot - bar) / 2.0;
    double acc = 0.0;
    for (size_t p = 0; p < parts; ++p) {
      const double v = std::max(0.0, bars.values[p][g]);
      if (v <= 0.0) continue;
      cv.fill_rect(f.px(x0), f.py(acc + v), f.px(x0 + bar), f.py(acc),
                   kPalette[p % kPaletteSize]);
      acc += v;
    }
    const std::string& gl = bars.group_labels[g];
    cv.text(f.px(x0 + bar / 2) - Canvas::text_width(gl) / 2, f.bottom + 8, gl, kAxis);
  }
  draw_legend(cv, f, bars.part_labels);
  cv.save(path);
}

}  // namespace plot
}  // namespace sebcomm
