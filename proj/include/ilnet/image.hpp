#pragma once

#include <cstddef>
#include <vector>

namespace ilnet {

// Raster with float samples in [0, 255], row-major by (row, column, channel).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> values;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        values(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int row, int col, int ch = 0) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  float at(int row, int col, int ch = 0) const { return values[index(row, col, ch)]; }
  float& at(int row, int col, int ch = 0) { return values[index(row, col, ch)]; }
  bool empty() const { return values.empty(); }
};

// Gray -> replicated RGB, RGB -> luminance; identity when counts already match.
Image convert_channels(const Image& src, int channels);

}  // namespace ilnet
