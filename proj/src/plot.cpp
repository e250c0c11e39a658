#include "mec/plot.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace mec {

namespace {

// 5x7 glyphs, one byte per row, bit 4 = leftmost column.
struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;
};

constexpr Glyph kFont[] = {
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
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
    {'V', {0x11, 0x11, 0x11, 0x11, 0x0A, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
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
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'%', {0x19, 0x1A, 0x02, 0x04, 0x08, 0x0B, 0x13}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
};

const std::array<std::uint8_t, 7>& glyph_rows(char c) {
  static const std::array<std::uint8_t, 7> kBox = {0x1F, 0x11, 0x11, 0x11,
                                                   0x11, 0x11, 0x1F};
  const char up = static_cast<char>(
      std::toupper(static_cast<unsigned char>(c)));
  for (const Glyph& g : kFont)
    if (g.ch == up) return g.rows;
  return kBox;
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::FILE* f, const char type[4],
                 const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> buf;
  push_be32(buf, static_cast<std::uint32_t>(payload.size()));
  buf.insert(buf.end(), type, type + 4);
  buf.insert(buf.end(), payload.begin(), payload.end());
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, buf.data() + 4, static_cast<uInt>(buf.size() - 4)));
  push_be32(buf, crc);
  if (std::fwrite(buf.data(), 1, buf.size(), f) != buf.size())
    throw std::runtime_error("short write while saving png");
}

std::string format_tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

Canvas::Canvas(int width, int height, std::uint32_t rgb)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("canvas dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height * 3, 0);
  fill_rect(0, 0, width, height, rgb);
}

void Canvas::set_pixel(int x, int y, std::uint32_t rgb) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  data_[i] = static_cast<std::uint8_t>(rgb >> 16);
  data_[i + 1] = static_cast<std::uint8_t>(rgb >> 8);
  data_[i + 2] = static_cast<std::uint8_t>(rgb);
}

std::uint32_t Canvas::pixel(int x, int y) const {
  if (x < 0 || x >= width_ || y < 0 || y >= height_)
    throw std::out_of_range("pixel read outside the canvas");
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return (static_cast<std::uint32_t>(data_[i]) << 16) |
         (static_cast<std::uint32_t>(data_[i + 1]) << 8) | data_[i + 2];
}

void Canvas::fill_rect(int x, int y, int w, int h, std::uint32_t rgb) {
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx) set_pixel(xx, yy, rgb);
}

void Canvas::line(int x0, int y0, int x1, int y1, std::uint32_t rgb) {
  // Bresenham, all-integer.
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    set_pixel(x, y, rgb);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void Canvas::text(int x, int y, const std::string& s, std::uint32_t rgb,
                  int scale) {
  if (scale < 1) throw std::invalid_argument("text scale must be >= 1");
  int cx = x;
  for (char c : s) {
    const auto& rows = glyph_rows(c);
    for (int r = 0; r < 7; ++r)
      for (int col = 0; col < 5; ++col)
        if (rows[r] & (1 << (4 - col)))
          fill_rect(cx + col * scale, y + r * scale, scale, scale, rgb);
    cx += 6 * scale;
  }
}

int Canvas::text_width(const std::string& s, int scale) {
  if (s.empty()) return 0;
  return static_cast<int>(s.size()) * 6 * scale - scale;
}

int Canvas::text_height(int scale) { return 7 * scale; }

void Canvas::save_png(const std::string& path) const {
  // Filter byte 0 (no per-scanline filtering) in front of each row.
  const std::size_t stride = static_cast<std::size_t>(width_) * 3;
  std::vector<std::uint8_t> raw((stride + 1) * height_);
  for (int y = 0; y < height_; ++y) {
    raw[y * (stride + 1)] = 0;
    std::memcpy(&raw[y * (stride + 1) + 1], &data_[y * stride], stride);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    throw std::runtime_error("png deflate failed");
  z.resize(zlen);

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  static const std::uint8_t kMagic[8] = {0x89, 'P',  'N',  'G',
                                         0x0D, 0x0A, 0x1A, 0x0A};
  try {
    if (std::fwrite(kMagic, 1, 8, f) != 8)
      throw std::runtime_error("short write while saving png");
    std::vector<std::uint8_t> ihdr;
    push_be32(ihdr, static_cast<std::uint32_t>(width_));
    push_be32(ihdr, static_cast<std::uint32_t>(height_));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);  // deflate
    ihdr.push_back(0);  // adaptive filtering
    ihdr.push_back(0);  // no interlace
    write_chunk(f, "IHDR", ihdr);
    write_chunk(f, "IDAT", z);
    write_chunk(f, "IEND", {});
  } catch (...) {
    std::fclose(f);
    throw;
  }
  if (std::fclose(f) != 0)
    throw std::runtime_error("failed to flush " + path);
}

// ---------------------------------------------------------------------------
// Chart helpers
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kBlack = 0x000000;
constexpr std::uint32_t kGrid = 0xD8D8D8;
constexpr std::uint32_t kPalette[] = {0x1F77B4, 0xFF7F0E, 0x2CA02C, 0xD62728,
                                      0x9467BD, 0x8C564B};

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, int pix_lo, int pix_hi) const {
    const double t = (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

Range padded_range(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("empty plot range");
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

void plot_lines(const std::string& path, const std::string& title,
                const std::string& x_label, const std::string& y_label,
                const std::vector<Series>& series, int width, int height) {
  if (series.empty()) throw std::invalid_argument("no series to plot");
  std::size_t max_len = 0;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const Series& s : series) {
    max_len = std::max(max_len, s.values.size());
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (max_len < 2)
    throw std::invalid_argument("line plot needs at least two points");

  Canvas canvas(width, height);
  const int left = 78, right = width - 24, top = 44, bottom = height - 52;
  const Range yr = padded_range(lo, hi);
  const Range xr = {0.0, static_cast<double>(max_len - 1)};

  canvas.text((width - Canvas::text_width(title, 2)) / 2, 12, title, kBlack, 2);

  for (int i = 0; i <= 5; ++i) {  // horizontal grid + y ticks
    const double v = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    const int y = static_cast<int>(std::lround(yr.map(v, bottom, top)));
    canvas.line(left, y, right, y, kGrid);
    const std::string label = format_tick(v);
    canvas.text(left - 8 - Canvas::text_width(label, 1), y - 3, label, kBlack);
  }
  for (int i = 0; i <= 5; ++i) {  // x ticks
    const double v = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const int x = static_cast<int>(std::lround(xr.map(v, left, right)));
    canvas.line(x, bottom, x, bottom + 4, kBlack);
    const std::string label = format_tick(std::round(v));
    canvas.text(x - Canvas::text_width(label, 1) / 2, bottom + 8, label,
                kBlack);
  }
  canvas.line(left, top, left, bottom, kBlack);
  canvas.line(left, bottom, right, bottom, kBlack);
  canvas.text(left, 28, y_label, kBlack);
  canvas.text((width - Canvas::text_width(x_label, 1)) / 2, height - 22,
              x_label, kBlack);

  int legend_y = top + 8;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    // Series left on the default color cycle through the palette instead of
    // all landing on the same blue.
    const std::uint32_t rgb =
        (s.rgb == 0x1F77B4 && si != 0) ? kPalette[si % 6] : s.rgb;
    for (std::size_t i = 1; i < s.values.size(); ++i) {
      const int x0 = static_cast<int>(
          std::lround(xr.map(static_cast<double>(i - 1), left, right)));
      const int x1 = static_cast<int>(
          std::lround(xr.map(static_cast<double>(i), left, right)));
      const int y0 =
          static_cast<int>(std::lround(yr.map(s.values[i - 1], bottom, top)));
      const int y1 =
          static_cast<int>(std::lround(yr.map(s.values[i], bottom, top)));
      canvas.line(x0, y0, x1, y1, rgb);
      canvas.line(x0, y0 + 1, x1, y1 + 1, rgb);  // 2 px stroke
    }
    if (!s.label.empty()) {
      const int lx = right - 150;
      canvas.line(lx, legend_y + 3, lx + 22, legend_y + 3, rgb);
      canvas.line(lx, legend_y + 4, lx + 22, legend_y + 4, rgb);
      canvas.text(lx + 30, legend_y, s.label, kBlack);
      legend_y += 14;
    }
  }
  canvas.save_png(path);
}

void plot_bar_panels(const std::string& path,
                     const std::vector<BarPanel>& panels, int width,
                     int height) {
  if (panels.empty()) throw std::invalid_argument("no panels to plot");
  Canvas canvas(width, height);
  const int panel_w = width / static_cast<int>(panels.size());

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const BarPanel& panel = panels[p];
    if (panel.labels.size() != panel.values.size())
      throw std::invalid_argument("bar labels and values disagree in length");
    if (panel.values.empty())
      throw std::invalid_argument("bar panel has no bars");
    const int px = static_cast<int>(p) * panel_w;
    const int left = px + 64, right = px + panel_w - 24;
    const int top = 56, bottom = height - 64;

    double hi = 0.0;
    for (double v : panel.values) {
      if (v < 0.0)
        throw std::invalid_argument("bar values must be non-negative");
      hi = std::max(hi, v);
    }
    const Range yr = {0.0, hi == 0.0 ? 1.0 : hi * 1.12};

    canvas.text(px + (panel_w - Canvas::text_width(panel.title, 2)) / 2, 16,
                panel.title, kBlack, 2);
    for (int i = 0; i <= 4; ++i) {
      const double v = yr.lo + (yr.hi - yr.lo) * i / 4.0;
      const int y = static_cast<int>(std::lround(yr.map(v, bottom, top)));
      canvas.line(left, y, right, y, kGrid);
      const std::string label = format_tick(v);
      canvas.text(left - 6 - Canvas::text_width(label, 1), y - 3, label,
                  kBlack);
    }
    canvas.line(left, top, left, bottom, kBlack);
    canvas.line(left, bottom, right, bottom, kBlack);

    const int n = static_cast<int>(panel.values.size());
    const int span = right - left;
    const int slot = span / n;
    const int bar_w = std::max(8, (slot * 3) / 5);
    for (int i = 0; i < n; ++i) {
      const int cx = left + slot * i + slot / 2;
      const int y =
          static_cast<int>(std::lround(yr.map(panel.values[i], bottom, top)));
      canvas.fill_rect(cx - bar_w / 2, y, bar_w, bottom - y, kPalette[i % 6]);
      const std::string value_label = format_tick(panel.values[i]);
      canvas.text(cx - Canvas::text_width(value_label, 1) / 2, y - 12,
                  value_label, kBlack);
      canvas.text(cx - Canvas::text_width(panel.labels[i], 1) / 2, bottom + 10,
                  panel.labels[i], kBlack);
    }
  }
  canvas.save_png(path);
}

}  // namespace mec
