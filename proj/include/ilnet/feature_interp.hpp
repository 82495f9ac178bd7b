#pragma once

#include <span>
#include <vector>

#include "ilnet/feature_map.hpp"

namespace ilnet {

// Window displacement from a map's center: integer cells plus a fraction.
struct GridOffset {
  int kx = 0;
  int ky = 0;
  double dx = 0.0;
  double dy = 0.0;

  double total_x() const { return kx + dx; }
  double total_y() const { return ky + dy; }
};

// Splits a continuous cell displacement into the nearest integer and a remainder.
GridOffset split_offset(double cells_x, double cells_y);

struct ScaledMap {
  double scale = 1.0;
  FeatureMap map;
};

// Maps at a few fixed scales; scales strictly increasing, same channel count.
class ScaledMapSet {
 public:
  ScaledMapSet() = default;
  explicit ScaledMapSet(std::vector<ScaledMap> entries);

  const std::vector<ScaledMap>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double min_scale() const { return entries_.front().scale; }
  double max_scale() const { return entries_.back().scale; }

 private:
  std::vector<ScaledMap> entries_;
};

// Window whose top-left cell is (top, left).
FeatureMap extract_window_at(const FeatureMap& map, int top, int left, int out_size);

// out_size window displaced (kx, ky) cells from the map center; throws RangeError when
// it does not fit.
FeatureMap extract_window(const FeatureMap& map, int kx, int ky, int out_size);

// True when every sample position of the displaced window lies inside the grid.
bool window_in_hull(const FeatureMap& map, const GridOffset& offset, int out_size);

// Output cell (i, j) is the bilinear blend at continuous position
// (top0 + i + ky + dy, left0 + j + kx + dx); cell centers sit at integer coordinates.
FeatureMap sample_window_bilinear(const FeatureMap& map, const GridOffset& offset, int out_size);

// Spatially samples the two maps bracketing `scale`, each at its own offset, and blends
// (1 - a) * lo + a * hi with a = (scale - lo) / (hi - lo). offsets[i] belongs to
// set.entries()[i].
FeatureMap interp_scale(const ScaledMapSet& set, double scale, std::span<const GridOffset> offsets,
                        int out_size);

// True when interp_scale(set, scale, offsets, out_size) would succeed.
bool interp_reachable(const ScaledMapSet& set, double scale, std::span<const GridOffset> offsets,
                      int out_size);

struct Candidate {
  GridOffset offset;
  FeatureMap window;
};

// Every valid window of the map, row-major over (ky, kx).
std::vector<Candidate> candidate_grid(const FeatureMap& roi_map, int window = 3);

// Continuous displacement (cells) of an image point from the map center, using the
// map's crop transform.
std::array<double, 2> image_offset_cells(const FeatureMap& map, double image_x, double image_y);

namespace detail {
// Bilinear sampler with the fractional weights shifted by `weight_skew`; zero gives
// sample_window_bilinear. Exists for fault-injection checks.
FeatureMap sample_window_bilinear_skewed(const FeatureMap& map, const GridOffset& offset,
                                         int out_size, double weight_skew);
}  // namespace detail

}  // namespace ilnet
