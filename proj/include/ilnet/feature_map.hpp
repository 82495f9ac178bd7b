#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ilnet/geometry.hpp"

namespace ilnet {

// height x width x channels grid, row-major by (row, column, channel).
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> values;
  // Scale multiplier of the crop this map came from.
  double scale = 1.0;
  std::optional<CropTransform> transform;
  // For windows cut from a larger map: displacement of the window center from the
  // source map center, in cells.
  double offset_x = 0.0;
  double offset_y = 0.0;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  float at(int row, int col, int ch) const { return values[index(row, col, ch)]; }
  float& at(int row, int col, int ch) { return values[index(row, col, ch)]; }
  std::size_t size() const { return values.size(); }

  // Throws InputError when the shape or finiteness invariants are broken.
  void validate() const;
};

}  // namespace ilnet
