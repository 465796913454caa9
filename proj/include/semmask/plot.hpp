#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "semmask/glyphs.hpp"
#include "semmask/data/png_io.hpp"

namespace semmask::plot {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGrey{200, 200, 200};
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr std::array<Rgb, 6> kSeries{{{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75}}};

class Canvas {
 public:
  Canvas(int w, int h) : img_{h, w, 3, std::vector<std::uint8_t>(std::size_t(w) * h * 3, 255)} {}

  int width() const { return img_.width; }
  int height() const { return img_.height; }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
    std::copy(c.begin(), c.end(), img_.data.begin() + (std::size_t(y) * img_.width + x) * 3);
  }

  void fill(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
  }

  void line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    for (int err = dx + dy;;) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) err += dy, x0 += sx;
      if (e2 <= dx) err += dx, y0 += sy;
    }
  }

  void marker(int x, int y, Rgb c) { fill(x - 2, y - 2, x + 2, y + 2, c); }

  void text(int x, int y, const std::string& s, Rgb c = kBlack) {
    for (char ch : s) {
      if (ch >= 32 && ch < 127) {
        const auto& g = kGlyphs[std::size_t(ch - 32)];
        for (int r = 0; r < kGlyphHeight; ++r)
          for (int b = 0; b < kGlyphWidth; ++b)
            if (g[r] >> (kGlyphWidth - 1 - b) & 1) set(x + b, y + r, c);
      }
      x += kGlyphWidth;
    }
  }

  // Text rotated a quarter turn counter-clockwise, reading bottom to top.
  void vtext(int x, int y, const std::string& s, Rgb c = kBlack) {
    for (char ch : s) {
      if (ch >= 32 && ch < 127) {
        const auto& g = kGlyphs[std::size_t(ch - 32)];
        for (int r = 0; r < kGlyphHeight; ++r)
          for (int b = 0; b < kGlyphWidth; ++b)
            if (g[r] >> (kGlyphWidth - 1 - b) & 1) set(x + r, y - b, c);
      }
      y -= kGlyphWidth;
    }
  }

  void save(const std::string& path) const { png::write(path, img_); }

 private:
  png::Image img_;
};

inline int text_width(const std::string& s) { return int(s.size()) * kGlyphWidth; }

inline std::string fmt(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Plot area with linear axes, gridlines and tick labels.
class Axes {
 public:
  Axes(Canvas& c, double xmin, double xmax, double ymin, double ymax, int left = 56, int right = 16, int top = 28,
       int bottom = 44)
      : c_(c), x0_(left), x1_(c.width() - right), y0_(top), y1_(c.height() - bottom),
        xmin_(xmin), xmax_(xmax > xmin ? xmax : xmin + 1), ymin_(ymin), ymax_(ymax > ymin ? ymax : ymin + 1) {}

  int px(double x) const { return x0_ + int(std::lround((x - xmin_) / (xmax_ - xmin_) * (x1_ - x0_))); }
  int py(double y) const { return y1_ - int(std::lround((y - ymin_) / (ymax_ - ymin_) * (y1_ - y0_))); }
  int left() const { return x0_; }
  int right() const { return x1_; }
  int top() const { return y0_; }
  int bottom() const { return y1_; }

  void frame(const std::string& title, const std::string& xlabel, const std::string& ylabel, int yticks = 5,
             int xticks = 5, int xdigits = 0, int ydigits = 2) {
    for (int i = 0; i <= yticks; ++i) {
      const double v = ymin_ + (ymax_ - ymin_) * i / yticks;
      c_.line(x0_, py(v), x1_, py(v), kGrey);
      const std::string s = fmt(v, ydigits);
      c_.text(x0_ - 4 - text_width(s), py(v) - kGlyphHeight / 2, s);
    }
    for (int i = 0; xticks > 0 && i <= xticks; ++i) {
      const double v = xmin_ + (xmax_ - xmin_) * i / xticks;
      c_.line(px(v), y1_, px(v), y1_ + 3, kBlack);
      const std::string s = fmt(v, xdigits);
      c_.text(px(v) - text_width(s) / 2, y1_ + 5, s);
    }
    c_.line(x0_, y0_, x0_, y1_, kBlack);
    c_.line(x0_, y1_, x1_, y1_, kBlack);
    c_.text((c_.width() - text_width(title)) / 2, 8, title);
    c_.text((x0_ + x1_ - text_width(xlabel)) / 2, c_.height() - kGlyphHeight - 4, xlabel);
    c_.vtext(4, (y0_ + y1_ + text_width(ylabel)) / 2, ylabel);
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, Rgb col, bool markers = true) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) c_.line(px(xs[i - 1]), py(ys[i - 1]), px(xs[i]), py(ys[i]), col);
      if (markers) c_.marker(px(xs[i]), py(ys[i]), col);
    }
  }

  void legend(const std::vector<std::string>& names) {
    int y = y0_ + 4;
    for (std::size_t i = 0; i < names.size(); ++i, y += kGlyphHeight + 3) {
      const int x = x1_ - 8 - text_width(names[i]) - 14;
      c_.fill(x - 2, y - 1, x1_ - 6, y + kGlyphHeight + 1, kWhite);
      c_.fill(x, y + 3, x + 9, y + 7, kSeries[i % kSeries.size()]);
      c_.text(x + 14, y, names[i]);
    }
  }

 private:
  Canvas& c_;
  int x0_, x1_, y0_, y1_;
  double xmin_, xmax_, ymin_, ymax_;
};

// Vertical bars in [0, 1]; NaN values are drawn as "n/a".
inline void bar_chart(const std::string& path, const std::string& title, const std::vector<std::string>& names,
                      const std::vector<double>& values, const std::string& ylabel) {
  const int n = std::max<int>(1, int(names.size()));
  int longest = 0;
  for (const auto& s : names) longest = std::max(longest, text_width(s));
  Canvas c(std::max(360, 72 + 40 * n), 300 + longest);
  Axes ax(c, 0, n, 0, 1, 56, 16, 28, 16 + longest);
  ax.frame(title, "", ylabel, 5, 0);
  const double slot = double(ax.right() - ax.left()) / n;
  for (int i = 0; i < int(names.size()); ++i) {
    const int xl = ax.left() + int(slot * i + slot * 0.15), xr = ax.left() + int(slot * (i + 1) - slot * 0.15);
    const int xm = (xl + xr) / 2;
    if (std::isnan(values[i])) {
      c.text(xm - text_width("n/a") / 2, ax.bottom() - kGlyphHeight - 2, "n/a");
    } else {
      c.fill(xl, ax.py(values[i]), xr, ax.bottom() - 1, kSeries[0]);
      const std::string s = fmt(values[i], 2);
      c.text(xm - text_width(s) / 2, ax.py(values[i]) - kGlyphHeight - 1, s);
    }
    c.vtext(xm - kGlyphHeight / 2, ax.bottom() + 4 + text_width(names[i]), names[i]);
  }
  c.save(path);
}

struct Series {
  std::string name;
  std::vector<double> x, y;
};

inline void line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<Series>& series, int xdigits = 0, int ydigits = 2) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = 0, ymax = 1;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  Canvas c(560, 360);
  Axes ax(c, xmin, xmax, ymin, ymax);
  const int xticks = xdigits == 0 ? std::clamp(int(xmax - xmin), 1, 5) : 5;
  ax.frame(title, xlabel, ylabel, 5, xticks, xdigits, ydigits);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < series.size(); ++k) {
    ax.polyline(series[k].x, series[k].y, kSeries[k % kSeries.size()]);
    names.push_back(series[k].name);
  }
  ax.legend(names);
  c.save(path);
}

}  // namespace semmask::plot
