#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mec {

// Minimal raster canvas with a 5x7 uppercase bitmap font, saved as RGB PNG.
// Every drawing call is deterministic, so identical inputs produce identical
// files byte for byte.
class Canvas {
 public:
  Canvas(int width, int height, std::uint32_t rgb = 0xFFFFFF);

  int width() const { return width_; }
  int height() const { return height_; }

  // Out-of-range writes are clipped silently; reads throw.
  void set_pixel(int x, int y, std::uint32_t rgb);
  std::uint32_t pixel(int x, int y) const;

  void fill_rect(int x, int y, int w, int h, std::uint32_t rgb);
  void line(int x0, int y0, int x1, int y1, std::uint32_t rgb);
  // (x, y) is the top-left corner of the first glyph; lowercase is drawn
  // uppercase, unknown characters draw as a box.
  void text(int x, int y, const std::string& s, std::uint32_t rgb,
            int scale = 1);
  static int text_width(const std::string& s, int scale = 1);
  static int text_height(int scale = 1);

  void save_png(const std::string& path) const;

 private:
  int width_, height_;
  std::vector<std::uint8_t> data_;  // row-major RGB triplets
};

struct Series {
  std::string label;
  std::vector<double> values;  // plotted against their index
  std::uint32_t rgb = 0x1F77B4;
};

// Index-vs-value line chart with axes, ticks, and a legend.
void plot_lines(const std::string& path, const std::string& title,
                const std::string& x_label, const std::string& y_label,
                const std::vector<Series>& series, int width = 960,
                int height = 600);

struct BarPanel {
  std::string title;
  std::vector<std::string> labels;  // one per bar
  std::vector<double> values;
};

// Side-by-side bar charts, one per panel, each scaled to its own maximum.
void plot_bar_panels(const std::string& path,
                     const std::vector<BarPanel>& panels, int width = 960,
                     int height = 600);

}  // namespace mec
