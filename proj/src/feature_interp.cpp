#include "ilnet/feature_interp.hpp"

#include <cmath>

#include "ilnet/error.hpp"

namespace ilnet {

namespace {

constexpr double kHullEps = 1e-9;
constexpr double kScaleEps = 1e-12;

// Continuous top-left position of a centered out_size window.
double centered_origin(int n, int out_size) { return 0.5 * (n - out_size); }

void check_window(const FeatureMap& map, int out_size) {
  if (out_size < 1) throw RangeError("window size must be >= 1");
  if (map.height < out_size || map.width < out_size)
    throw RangeError("window " + std::to_string(out_size) + " larger than map " +
                     std::to_string(map.height) + "x" + std::to_string(map.width));
}

}  // namespace

GridOffset split_offset(double cells_x, double cells_y) {
  GridOffset o;
  o.kx = static_cast<int>(std::lround(cells_x));
  o.ky = static_cast<int>(std::lround(cells_y));
  o.dx = cells_x - o.kx;
  o.dy = cells_y - o.ky;
  return o;
}

ScaledMapSet::ScaledMapSet(std::vector<ScaledMap> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InputError("scaled map set needs at least one map");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].scale > 0)) throw InputError("map scales must be positive");
    if (i > 0 && !(entries_[i].scale > entries_[i - 1].scale))
      throw InputError("map scales must be strictly increasing");
    if (entries_[i].map.channels != entries_.front().map.channels)
      throw InputError("maps in a scaled set must share the channel count");
  }
}

FeatureMap extract_window_at(const FeatureMap& map, int top, int left, int out_size) {
  check_window(map, out_size);
  if (top < 0 || left < 0 || top + out_size > map.height || left + out_size > map.width)
    throw RangeError("window at (" + std::to_string(top) + ", " + std::to_string(left) +
                     ") size " + std::to_string(out_size) + " outside " +
                     std::to_string(map.height) + "x" + std::to_string(map.width) + " map");
  FeatureMap out(out_size, out_size, map.channels);
  out.scale = map.scale;
  out.transform = map.transform;
  out.offset_x = left - centered_origin(map.width, out_size);
  out.offset_y = top - centered_origin(map.height, out_size);
  const std::size_t row_len = static_cast<std::size_t>(out_size) * map.channels;
  for (int r = 0; r < out_size; ++r) {
    const float* src = &map.values[map.index(top + r, left, 0)];
    std::copy(src, src + row_len, &out.values[out.index(r, 0, 0)]);
  }
  return out;
}

FeatureMap extract_window(const FeatureMap& map, int kx, int ky, int out_size) {
  check_window(map, out_size);
  if ((map.height - out_size) % 2 != 0 || (map.width - out_size) % 2 != 0)
    throw RangeError("map and window sizes differ in parity; no centered integer window");
  const int top = (map.height - out_size) / 2 + ky;
  const int left = (map.width - out_size) / 2 + kx;
  return extract_window_at(map, top, left, out_size);
}

bool window_in_hull(const FeatureMap& map, const GridOffset& offset, int out_size) {
  if (out_size < 1 || map.height < 1 || map.width < 1) return false;
  const double top = centered_origin(map.height, out_size) + offset.total_y();
  const double left = centered_origin(map.width, out_size) + offset.total_x();
  return top >= -kHullEps && left >= -kHullEps &&
         top + out_size - 1 <= map.height - 1 + kHullEps &&
         left + out_size - 1 <= map.width - 1 + kHullEps;
}

FeatureMap detail::sample_window_bilinear_skewed(const FeatureMap& map, const GridOffset& offset,
                                                 int out_size, double weight_skew) {
  check_window(map, out_size);
  if (!window_in_hull(map, offset, out_size))
    throw RangeError("bilinear window at offset (" + std::to_string(offset.total_x()) + ", " +
                     std::to_string(offset.total_y()) + ") leaves the " +
                     std::to_string(map.height) + "x" + std::to_string(map.width) + " grid");
  const double top = centered_origin(map.height, out_size) + offset.total_y();
  const double left = centered_origin(map.width, out_size) + offset.total_x();
  FeatureMap out(out_size, out_size, map.channels);
  out.scale = map.scale;
  out.transform = map.transform;
  out.offset_x = offset.total_x();
  out.offset_y = offset.total_y();
  const int ch = map.channels;
  for (int i = 0; i < out_size; ++i) {
    const double y = std::clamp(top + i, 0.0, static_cast<double>(map.height - 1));
    const int y0 = std::min(static_cast<int>(std::floor(y)), map.height - 1);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double wy = y - y0 + weight_skew;
    for (int j = 0; j < out_size; ++j) {
      const double x = std::clamp(left + j, 0.0, static_cast<double>(map.width - 1));
      const int x0 = std::min(static_cast<int>(std::floor(x)), map.width - 1);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double wx = x - x0 + weight_skew;
      const float* a = &map.values[map.index(y0, x0, 0)];
      const float* b = &map.values[map.index(y0, x1, 0)];
      const float* c = &map.values[map.index(y1, x0, 0)];
      const float* d = &map.values[map.index(y1, x1, 0)];
      float* dst = &out.values[out.index(i, j, 0)];
      if (wx == 0.0 && wy == 0.0) {
        std::copy(a, a + ch, dst);
        continue;
      }
      for (int k = 0; k < ch; ++k) {
        const double topv = (1 - wx) * a[k] + wx * b[k];
        const double botv = (1 - wx) * c[k] + wx * d[k];
        dst[k] = static_cast<float>((1 - wy) * topv + wy * botv);
      }
    }
  }
  return out;
}

FeatureMap sample_window_bilinear(const FeatureMap& map, const GridOffset& offset, int out_size) {
  return detail::sample_window_bilinear_skewed(map, offset, out_size, 0.0);
}

FeatureMap interp_scale(const ScaledMapSet& set, double scale, std::span<const GridOffset> offsets,
                        int out_size) {
  const auto& e = set.entries();
  if (e.empty()) throw InputError("empty scaled map set");
  if (offsets.size() != e.size()) throw InputError("need one offset per stored scale");
  const double tol = kScaleEps * scale;
  if (scale < set.min_scale() - tol || scale > set.max_scale() + tol)
    throw RangeError("scale " + std::to_string(scale) + " outside [" +
                     std::to_string(set.min_scale()) + ", " + std::to_string(set.max_scale()) +
                     "]");
  for (std::size_t i = 0; i < e.size(); ++i)
    if (std::abs(scale - e[i].scale) <= tol) {
      auto out = sample_window_bilinear(e[i].map, offsets[i], out_size);
      out.scale = e[i].scale;
      return out;
    }
  std::size_t hi = 1;
  while (e[hi].scale < scale) ++hi;
  const std::size_t lo = hi - 1;
  const double a = (scale - e[lo].scale) / (e[hi].scale - e[lo].scale);
  FeatureMap out = sample_window_bilinear(e[lo].map, offsets[lo], out_size);
  const FeatureMap upper = sample_window_bilinear(e[hi].map, offsets[hi], out_size);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = static_cast<float>((1 - a) * out.values[i] + a * upper.values[i]);
  out.scale = scale;
  out.transform.reset();
  return out;
}

bool interp_reachable(const ScaledMapSet& set, double scale, std::span<const GridOffset> offsets,
                      int out_size) {
  const auto& e = set.entries();
  if (e.empty() || offsets.size() != e.size()) return false;
  const double tol = kScaleEps * scale;
  if (scale < set.min_scale() - tol || scale > set.max_scale() + tol) return false;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (std::abs(scale - e[i].scale) <= tol) return window_in_hull(e[i].map, offsets[i], out_size);
  std::size_t hi = 1;
  while (e[hi].scale < scale) ++hi;
  return window_in_hull(e[hi - 1].map, offsets[hi - 1], out_size) &&
         window_in_hull(e[hi].map, offsets[hi], out_size);
}

std::vector<Candidate> candidate_grid(const FeatureMap& roi_map, int window) {
  if (roi_map.height < window || roi_map.width < window)
    throw RangeError("map smaller than candidate window");
  std::vector<Candidate> out;
  const int rows = roi_map.height - window + 1;
  const int cols = roi_map.width - window + 1;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  const int cy = (roi_map.height - window) / 2;
  const int cx = (roi_map.width - window) / 2;
  for (int top = 0; top < rows; ++top)
    for (int left = 0; left < cols; ++left) {
      Candidate c;
      c.offset.kx = left - cx;
      c.offset.ky = top - cy;
      c.window = extract_window_at(roi_map, top, left, window);
      out.push_back(std::move(c));
    }
  return out;
}

std::array<double, 2> image_offset_cells(const FeatureMap& map, double image_x, double image_y) {
  if (!map.transform) throw InputError("feature map has no crop transform");
  const auto [col, row] = map.transform->image_to_cell(image_x, image_y);
  return {col - 0.5 * (map.width - 1), row - 0.5 * (map.height - 1)};
}

}  // namespace ilnet
