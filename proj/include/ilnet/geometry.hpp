#pragma once

#include <array>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ilnet/image.hpp"

namespace ilnet {

using Rng = std::mt19937_64;

// Crop pixels covered by the object in every network input.
inline constexpr double kObjectPixels = 75.0;
// Effective stride of the reference backbone, in crop pixels per conv3 cell.
inline constexpr double kCellStride = 16.0;
// Crop-pixel coordinate of the center of conv3 cell 0 (receptive field 75 px).
inline constexpr double kFirstCellCenter = 37.5;

// Axis-aligned rectangle in continuous image coordinates; covers [x, x+w) x [y, y+h).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  bool valid() const;
  static Box from_center(double cx, double cy, double w, double h) {
    return Box{cx - 0.5 * w, cy - 0.5 * h, w, h};
  }
  friend bool operator==(const Box&, const Box&) = default;
};

// Maps a source rectangle of the image onto a dest_side x dest_side crop.
// The target box scaled by `scale` covers exactly kObjectPixels crop pixels.
struct CropTransform {
  Box target;           // unscaled target the crop is built around
  double scale = 1.0;   // scale multiplier applied to the target before cropping
  double src_x = 0.0;   // source rectangle, image coordinates
  double src_y = 0.0;
  double src_w = 0.0;
  double src_h = 0.0;
  int dest_side = 0;
  double scale_x = 1.0;  // crop pixels per image pixel
  double scale_y = 1.0;
  float pad_value = 128.0f;

  // Crop continuous coordinate -> image continuous coordinate.
  std::array<double, 2> to_image(double u, double v) const {
    return {src_x + u / scale_x, src_y + v / scale_y};
  }
  std::array<double, 2> to_crop(double X, double Y) const {
    return {(X - src_x) * scale_x, (Y - src_y) * scale_y};
  }
  // Image point -> continuous conv3 cell coordinate (col, row) for this crop.
  std::array<double, 2> image_to_cell(double X, double Y) const;
  std::array<double, 2> cell_to_image(double col, double row) const;
};

enum class LocClass { up = 0, down = 1, left = 2, right = 3, middle = 4 };
inline constexpr int kLocClassCount = 5;
std::string_view to_string(LocClass c);

double iou(const Box& a, const Box& b);
double center_error(const Box& a, const Box& b);

// Square crop centered on the target whose scaled size maps to 75 crop pixels.
// Throws InputError for degenerate targets or non-positive scale.
CropTransform roi_crop_transform(const Box& target, double scale, int dest_side,
                                 int image_width, int image_height,
                                 float pad_value = 128.0f);

// Build a transform from an explicit 1:1 source rectangle (used for identity crops).
CropTransform identity_transform(int side);

// Box for a conv3 window displaced by (kx+dx, ky+dy) cells from the transform's center.
Box grid_to_box(int kx, int ky, double dx, double dy, const CropTransform& t, double scale);

struct BoxPredicate {
  std::string name;
  std::function<bool(const Box&)> test;
};

// Rejection sampler: center jitter ~ N(0, trans_sigma * mean(w, h)) per axis and a
// shared size multiplier 1.2^N(0, scale_sigma). Gives up after 100*n attempts.
std::vector<Box> sample_gaussian_boxes(Rng& rng, const Box& mean, double trans_sigma,
                                       double scale_sigma, int n, const BoxPredicate& pred);

// Centers uniform over the image, size multiplier 1.2^N(0, scale_sigma).
std::vector<Box> sample_uniform_boxes(Rng& rng, const Box& mean, int image_width,
                                      int image_height, double scale_sigma, int n,
                                      const BoxPredicate& pred);

// Where the target sits inside the sample patch.
LocClass localization_label(const Box& sample, const Box& target);

// Bilinear resampling of the transform's source region; outside pixels read pad_value.
Image crop_patch(const Image& frame, const CropTransform& t);

}  // namespace ilnet
