#pragma once

// Brute-force reference implementations used as test oracles. Written directly from the
// textbook definitions; they share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ilnet/backbone.hpp"
#include "ilnet/eval_io.hpp"
#include "ilnet/feature_map.hpp"
#include "ilnet/geometry.hpp"
#include "ilnet/heads.hpp"

namespace oracle {

// IoU of integer-coordinate boxes by counting unit cells.
inline double iou_pixels(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  const int x0 = std::min(ax, bx), y0 = std::min(ay, by);
  const int x1 = std::max(ax + aw, bx + bw), y1 = std::max(ay + ah, by + bh);
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const bool ina = x >= ax && x < ax + aw && y >= ay && y < ay + ah;
      const bool inb = x >= bx && x < bx + bw && y >= by && y < by + bh;
      inter += ina && inb;
      uni += ina || inb;
    }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

// Direct convolution with zero padding, double accumulation.
inline ilnet::FeatureMap conv(const ilnet::FeatureMap& in, const ilnet::ConvSpec& s,
                              const ilnet::ConvParams& p) {
  const int oh = (in.height + 2 * s.padding - s.kernel) / s.stride + 1;
  const int ow = (in.width + 2 * s.padding - s.kernel) / s.stride + 1;
  ilnet::FeatureMap out(oh, ow, s.out_channels);
  for (int oc = 0; oc < s.out_channels; ++oc)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = p.bias[oc];
        for (int ic = 0; ic < s.in_channels; ++ic)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y * s.stride + ky - s.padding;
              const int ix = x * s.stride + kx - s.padding;
              if (iy < 0 || ix < 0 || iy >= in.height || ix >= in.width) continue;
              const std::size_t w =
                  ((static_cast<std::size_t>(oc) * s.in_channels + ic) * s.kernel + ky) * s.kernel + kx;
              acc += static_cast<double>(p.weights[w]) * in.at(iy, ix, ic);
            }
        out.at(y, x, oc) = static_cast<float>(acc);
      }
  return out;
}

inline ilnet::FeatureMap relu(ilnet::FeatureMap m) {
  for (auto& v : m.values) v = v > 0 ? v : 0.0f;
  return m;
}

inline ilnet::FeatureMap pool(const ilnet::FeatureMap& in, const ilnet::PoolSpec& s) {
  const int oh = (in.height - s.window) / s.stride + 1;
  const int ow = (in.width - s.window) / s.stride + 1;
  ilnet::FeatureMap out(oh, ow, in.channels);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        float m = -INFINITY;
        for (int a = 0; a < s.window; ++a)
          for (int b = 0; b < s.window; ++b) m = std::max(m, in.at(y * s.stride + a, x * s.stride + b, c));
        out.at(y, x, c) = m;
      }
  return out;
}

inline ilnet::FeatureMap lrn(const ilnet::FeatureMap& in, const ilnet::LrnSpec& s) {
  ilnet::FeatureMap out = in;
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      for (int c = 0; c < in.channels; ++c) {
        double sum = 0;
        for (int j = c - s.n / 2; j <= c + s.n / 2; ++j)
          if (j >= 0 && j < in.channels) sum += static_cast<double>(in.at(y, x, j)) * in.at(y, x, j);
        out.at(y, x, c) = static_cast<float>(in.at(y, x, c) / std::pow(s.kappa + s.alpha * sum, s.beta));
      }
  return out;
}

// Whole stack, layer by layer, using the oracle layers above.
inline ilnet::FeatureMap forward(const ilnet::Image& crop, const ilnet::ConvBackboneSpec& spec,
                                 const ilnet::BackboneWeights& w) {
  ilnet::FeatureMap x(crop.height, crop.width, crop.channels);
  for (std::size_t i = 0; i < crop.values.size(); ++i)
    x.values[i] = (crop.values[i] - spec.input_mean) * spec.input_scale;
  std::size_t ci = 0;
  for (const auto& l : spec.layers) {
    if (auto* c = std::get_if<ilnet::ConvSpec>(&l)) x = conv(x, *c, w.conv[ci++]);
    else if (std::holds_alternative<ilnet::ReluSpec>(l)) x = relu(x);
    else if (auto* p = std::get_if<ilnet::PoolSpec>(&l)) x = pool(x, *p);
    else if (auto* n = std::get_if<ilnet::LrnSpec>(&l)) x = lrn(x, *n);
  }
  return x;
}

// Bilinear value at continuous (row, col) of one channel; cell centers at integers.
inline double bilinear(const ilnet::FeatureMap& m, double r, double c, int ch) {
  const int r0 = static_cast<int>(std::floor(r)), c0 = static_cast<int>(std::floor(c));
  const double fr = r - r0, fc = c - c0;
  auto at = [&](int rr, int cc) {
    rr = std::min(rr, m.height - 1);
    cc = std::min(cc, m.width - 1);
    return static_cast<double>(m.at(rr, cc, ch));
  };
  return (1 - fr) * ((1 - fc) * at(r0, c0) + fc * at(r0, c0 + 1)) +
         fr * ((1 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c0 + 1));
}

// Head forward as explicit matrix products with ReLU between layers.
inline std::vector<double> head(const ilnet::HeadParams& h, const std::vector<float>& x) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < h.layers.size(); ++l) {
    const auto& L = h.layers[l];
    std::vector<double> z(L.out);
    for (int o = 0; o < L.out; ++o) {
      double s = L.bias[o];
      for (int i = 0; i < L.in; ++i) s += static_cast<double>(L.weights[o * L.in + i]) * a[i];
      z[o] = l + 1 < h.layers.size() ? std::max(0.0, s) : s;
    }
    a = std::move(z);
  }
  return a;
}

// Per-frame OPE recomputation from the definitions.
inline ilnet::OpeResult ope(const std::vector<ilnet::Box>& est, const std::vector<ilnet::Box>& gt) {
  ilnet::OpeResult r;
  const double n = static_cast<double>(est.size());
  for (int t = 0; t <= 50; ++t) {
    int k = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double dx = est[i].cx() - gt[i].cx(), dy = est[i].cy() - gt[i].cy();
      k += std::sqrt(dx * dx + dy * dy) <= t;
    }
    r.precision.push_back(k / n);
  }
  for (int i = 0; i <= 20; ++i) {
    int k = 0;
    for (std::size_t f = 0; f < est.size(); ++f) {
      const double o = ilnet::iou(est[f], gt[f]);
      k += i == 20 ? o >= 1.0 : o > i / 20.0;
    }
    r.success.push_back(k / n);
  }
  r.precision_20 = r.precision[20];
  double s = 0;
  for (double v : r.success) s += v;
  r.auc = s / 21.0;
  return r;
}

// Top-k indices by full sort: descending value, ascending index.
inline std::vector<std::size_t> top_k(const std::vector<double>& v, int k) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v[a] != v[b] ? v[a] > v[b] : a < b;
  });
  idx.resize(std::min<std::size_t>(k, idx.size()));
  return idx;
}

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace oracle
