#include "ilnet/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ilnet/error.hpp"

namespace ilnet {

bool Box::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0 &&
         h > 0;
}

std::string_view to_string(LocClass c) {
  switch (c) {
    case LocClass::up: return "up";
    case LocClass::down: return "down";
    case LocClass::left: return "left";
    case LocClass::right: return "right";
    case LocClass::middle: return "middle";
  }
  return "?";
}

std::array<double, 2> CropTransform::image_to_cell(double X, double Y) const {
  const auto [u, v] = to_crop(X, Y);
  return {(u - kFirstCellCenter) / kCellStride, (v - kFirstCellCenter) / kCellStride};
}

std::array<double, 2> CropTransform::cell_to_image(double col, double row) const {
  return to_image(kFirstCellCenter + kCellStride * col, kFirstCellCenter + kCellStride * row);
}

double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_error(const Box& a, const Box& b) {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

CropTransform roi_crop_transform(const Box& target, double scale, int dest_side,
                                 int image_width, int image_height, float pad_value) {
  if (!target.valid()) throw InputError("degenerate target box");
  if (!(scale > 0) || !std::isfinite(scale)) throw InputError("crop scale must be positive");
  if (dest_side < 1) throw InputError("crop side must be positive");
  if (image_width < 1 || image_height < 1) throw InputError("empty image");
  CropTransform t;
  t.target = target;
  t.scale = scale;
  t.dest_side = dest_side;
  t.src_w = dest_side / kObjectPixels * scale * target.w;
  t.src_h = dest_side / kObjectPixels * scale * target.h;
  t.src_x = target.cx() - 0.5 * t.src_w;
  t.src_y = target.cy() - 0.5 * t.src_h;
  t.scale_x = dest_side / t.src_w;
  t.scale_y = dest_side / t.src_h;
  t.pad_value = pad_value;
  return t;
}

CropTransform identity_transform(int side) {
  CropTransform t;
  t.target = Box::from_center(0.5 * side, 0.5 * side, kObjectPixels, kObjectPixels);
  t.dest_side = side;
  t.src_w = t.src_h = side;
  return t;
}

Box grid_to_box(int kx, int ky, double dx, double dy, const CropTransform& t, double scale) {
  const double pitch = kCellStride / kObjectPixels * scale;
  const double cx = t.target.cx() + (kx + dx) * pitch * t.target.w;
  const double cy = t.target.cy() + (ky + dy) * pitch * t.target.h;
  return Box::from_center(cx, cy, scale * t.target.w, scale * t.target.h);
}

namespace {

double draw_normal(Rng& rng, double sigma) {
  if (sigma <= 0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

template <typename Draw>
std::vector<Box> rejection_sample(int n, const BoxPredicate& pred, Draw&& draw) {
  if (n < 0) throw InputError("sample count must be non-negative");
  std::vector<Box> out;
  out.reserve(static_cast<std::size_t>(n));
  const long cap = 100L * n;
  for (long attempt = 0; static_cast<int>(out.size()) < n; ++attempt) {
    if (attempt >= cap)
      throw SamplingError("attempt cap " + std::to_string(cap) + " exceeded for predicate '" +
                          pred.name + "' (" + std::to_string(out.size()) + "/" +
                          std::to_string(n) + " accepted)");
    Box b = draw();
    if (!pred.test || pred.test(b)) out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<Box> sample_gaussian_boxes(Rng& rng, const Box& mean, double trans_sigma,
                                       double scale_sigma, int n, const BoxPredicate& pred) {
  if (trans_sigma < 0 || scale_sigma < 0) throw InputError("sampler sigma must be >= 0");
  const double extent = 0.5 * (mean.w + mean.h);
  return rejection_sample(n, pred, [&] {
    const double jx = draw_normal(rng, trans_sigma * extent);
    const double jy = draw_normal(rng, trans_sigma * extent);
    const double m = std::pow(1.2, draw_normal(rng, scale_sigma));
    return Box::from_center(mean.cx() + jx, mean.cy() + jy, mean.w * m, mean.h * m);
  });
}

std::vector<Box> sample_uniform_boxes(Rng& rng, const Box& mean, int image_width,
                                      int image_height, double scale_sigma, int n,
                                      const BoxPredicate& pred) {
  std::uniform_real_distribution<double> ux(0.0, image_width);
  std::uniform_real_distribution<double> uy(0.0, image_height);
  return rejection_sample(n, pred, [&] {
    const double cx = ux(rng);
    const double cy = uy(rng);
    const double m = std::pow(1.2, draw_normal(rng, scale_sigma));
    return Box::from_center(cx, cy, mean.w * m, mean.h * m);
  });
}

LocClass localization_label(const Box& sample, const Box& target) {
  const double ox = (target.cx() - sample.cx()) / sample.w;
  const double oy = (target.cy() - sample.cy()) / sample.h;
  if (std::max(std::abs(ox), std::abs(oy)) <= 4.0 / kObjectPixels) return LocClass::middle;
  if (std::abs(ox) >= std::abs(oy)) return ox > 0 ? LocClass::right : LocClass::left;
  return oy > 0 ? LocClass::down : LocClass::up;
}

Image crop_patch(const Image& frame, const CropTransform& t) {
  const int side = t.dest_side;
  const int ch = frame.channels;
  Image out(side, side, ch);
  auto pixel = [&](int r, int c, int k) -> float {
    if (r < 0 || c < 0 || r >= frame.height || c >= frame.width) return t.pad_value;
    return frame.at(r, c, k);
  };
  for (int r = 0; r < side; ++r) {
    const double sy = t.src_y + (r + 0.5) / t.scale_y - 0.5;
    const double fy = std::floor(sy);
    const int y0 = static_cast<int>(fy);
    const double wy = sy - fy;
    for (int c = 0; c < side; ++c) {
      const double sx = t.src_x + (c + 0.5) / t.scale_x - 0.5;
      const double fx = std::floor(sx);
      const int x0 = static_cast<int>(fx);
      const double wx = sx - fx;
      for (int k = 0; k < ch; ++k) {
        const double top = (1 - wx) * pixel(y0, x0, k) + wx * pixel(y0, x0 + 1, k);
        const double bot = (1 - wx) * pixel(y0 + 1, x0, k) + wx * pixel(y0 + 1, x0 + 1, k);
        out.at(r, c, k) = static_cast<float>((1 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

}  // namespace ilnet
