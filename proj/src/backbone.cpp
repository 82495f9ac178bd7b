#include "ilnet/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "ilnet/error.hpp"

namespace ilnet {

void FeatureMap::validate() const {
  if (height < 1 || width < 1 || channels < 1) throw InputError("feature map has an empty axis");
  if (values.size() != static_cast<std::size_t>(height) * width * channels)
    throw InputError("feature map value count does not match its shape");
  for (float v : values)
    if (!std::isfinite(v)) throw InputError("feature map contains a non-finite value");
}

std::vector<ConvSpec> ConvBackboneSpec::conv_layers() const {
  std::vector<ConvSpec> out;
  for (const auto& l : layers)
    if (const auto* c = std::get_if<ConvSpec>(&l)) out.push_back(*c);
  return out;
}

int ConvBackboneSpec::output_channels() const {
  int ch = input_channels;
  for (const auto& l : layers)
    if (const auto* c = std::get_if<ConvSpec>(&l)) ch = c->out_channels;
  return ch;
}

ConvBackboneSpec reference_spec(int c1, int c2, int c3, int input_channels, LrnSpec lrn) {
  ConvBackboneSpec s;
  s.input_channels = input_channels;
  s.layers = {ConvSpec{7, 2, input_channels, c1, 0}, ReluSpec{}, lrn, PoolSpec{3, 2},
              ConvSpec{5, 2, c1, c2, 0},             ReluSpec{}, lrn, PoolSpec{3, 2},
              ConvSpec{3, 1, c2, c3, 0},             ReluSpec{}};
  return s;
}

ConvBackboneSpec desk_spec(int input_channels) { return reference_spec(8, 16, 32, input_channels); }

ConvBackboneSpec vggm_geometry_spec(int input_channels) {
  return reference_spec(96, 256, 512, input_channels);
}

BackboneWeights init_backbone_weights(const ConvBackboneSpec& spec, Rng& rng) {
  BackboneWeights w;
  for (const auto& c : spec.conv_layers()) {
    ConvParams p;
    const std::size_t fan_in = static_cast<std::size_t>(c.kernel) * c.kernel * c.in_channels;
    std::normal_distribution<float> dist(0.0f, static_cast<float>(std::sqrt(2.0 / fan_in)));
    p.weights.resize(fan_in * c.out_channels);
    for (auto& v : p.weights) v = dist(rng);
    p.bias.assign(static_cast<std::size_t>(c.out_channels), 0.0f);
    w.conv.push_back(std::move(p));
  }
  return w;
}

namespace {

int spatial_out(int n, int k, int s, int pad) {
  const int eff = n + 2 * pad;
  if (eff < k || k < 1 || s < 1) return 0;
  return (eff - k) / s + 1;
}

void copy_provenance(const FeatureMap& from, FeatureMap& to) {
  to.scale = from.scale;
  to.transform = from.transform;
  to.offset_x = from.offset_x;
  to.offset_y = from.offset_y;
}

}  // namespace

FeatureMap conv_layer_forward(const FeatureMap& input, const ConvSpec& layer,
                              const ConvParams& params) {
  const int k = layer.kernel;
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  if (input.channels != cin)
    throw ConfigError("conv input has " + std::to_string(input.channels) +
                      " channels, layer expects " + std::to_string(cin));
  const int oh = spatial_out(input.height, k, layer.stride, layer.padding);
  const int ow = spatial_out(input.width, k, layer.stride, layer.padding);
  if (oh < 1 || ow < 1)
    throw ConfigError("conv kernel " + std::to_string(k) + " larger than input " +
                      std::to_string(input.height) + "x" + std::to_string(input.width));
  const std::size_t wcount = static_cast<std::size_t>(cout) * cin * k * k;
  if (params.weights.size() != wcount || params.bias.size() != static_cast<std::size_t>(cout))
    throw ConfigError("conv parameter count does not match layer shape");

  // Repack to (kernel-row, kernel-col, in, out) so the inner loop runs over outputs.
  std::vector<float> packed(wcount);
  for (int o = 0; o < cout; ++o)
    for (int i = 0; i < cin; ++i)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          packed[((static_cast<std::size_t>(ky) * k + kx) * cin + i) * cout + o] =
              params.weights[((static_cast<std::size_t>(o) * cin + i) * k + ky) * k + kx];

  FeatureMap out(oh, ow, cout);
  copy_provenance(input, out);
  std::vector<double> acc(static_cast<std::size_t>(cout));
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int o = 0; o < cout; ++o) acc[o] = params.bias[o];
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * layer.stride + ky - layer.padding;
        if (iy < 0 || iy >= input.height) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * layer.stride + kx - layer.padding;
          if (ix < 0 || ix >= input.width) continue;
          const float* in = &input.values[input.index(iy, ix, 0)];
          const float* wp = &packed[(static_cast<std::size_t>(ky) * k + kx) * cin * cout];
          for (int i = 0; i < cin; ++i) {
            const double x = in[i];
            const float* wrow = wp + static_cast<std::size_t>(i) * cout;
            for (int o = 0; o < cout; ++o) acc[o] += x * wrow[o];
          }
        }
      }
      float* dst = &out.values[out.index(oy, ox, 0)];
      for (int o = 0; o < cout; ++o) dst[o] = static_cast<float>(acc[o]);
    }
  }
  return out;
}

FeatureMap relu_forward(FeatureMap input) {
  for (auto& v : input.values) v = std::max(v, 0.0f);
  return input;
}

FeatureMap max_pool_forward(const FeatureMap& input, const PoolSpec& layer) {
  const int oh = spatial_out(input.height, layer.window, layer.stride, 0);
  const int ow = spatial_out(input.width, layer.window, layer.stride, 0);
  if (oh < 1 || ow < 1)
    throw ConfigError("pool window " + std::to_string(layer.window) + " larger than input " +
                      std::to_string(input.height) + "x" + std::to_string(input.width));
  FeatureMap out(oh, ow, input.channels);
  copy_provenance(input, out);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int c = 0; c < input.channels; ++c) {
        float m = input.at(oy * layer.stride, ox * layer.stride, c);
        for (int wy = 0; wy < layer.window; ++wy)
          for (int wx = 0; wx < layer.window; ++wx)
            m = std::max(m, input.at(oy * layer.stride + wy, ox * layer.stride + wx, c));
        out.at(oy, ox, c) = m;
      }
  return out;
}

FeatureMap lrn_forward(const FeatureMap& input, const LrnSpec& layer) {
  if (layer.n < 1) throw ConfigError("LRN window must be >= 1");
  FeatureMap out = input;
  const int half = layer.n / 2;
  const int ch = input.channels;
  std::vector<double> sq(static_cast<std::size_t>(ch));
  for (int y = 0; y < input.height; ++y)
    for (int x = 0; x < input.width; ++x) {
      const float* in = &input.values[input.index(y, x, 0)];
      float* dst = &out.values[out.index(y, x, 0)];
      for (int c = 0; c < ch; ++c) sq[c] = static_cast<double>(in[c]) * in[c];
      for (int c = 0; c < ch; ++c) {
        double sum = 0.0;
        for (int j = std::max(0, c - half); j <= std::min(ch - 1, c + half); ++j) sum += sq[j];
        dst[c] = static_cast<float>(in[c] / std::pow(layer.kappa + layer.alpha * sum, layer.beta));
      }
    }
  return out;
}

std::optional<int> output_side(const ConvBackboneSpec& spec, int input_side) {
  int n = input_side;
  for (const auto& l : spec.layers) {
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      n = spatial_out(n, c->kernel, c->stride, c->padding);
    } else if (const auto* p = std::get_if<PoolSpec>(&l)) {
      n = spatial_out(n, p->window, p->stride, 0);
    }
    if (n < 1) return std::nullopt;
  }
  return n;
}

FeatureMap backbone_forward(const Image& crop, const ConvBackboneSpec& spec,
                            const BackboneWeights& weights,
                            const std::optional<CropTransform>& transform, double scale) {
  if (crop.width != crop.height) throw InputError("backbone input must be square");
  if (crop.channels != spec.input_channels)
    throw InputError("crop has " + std::to_string(crop.channels) + " channels, backbone expects " +
                     std::to_string(spec.input_channels));
  if (!output_side(spec, crop.width))
    throw InputError("crop side " + std::to_string(crop.width) + " too small for backbone");
  FeatureMap x(crop.height, crop.width, crop.channels);
  for (std::size_t i = 0; i < crop.values.size(); ++i)
    x.values[i] = (crop.values[i] - spec.input_mean) * spec.input_scale;
  x.scale = scale;
  x.transform = transform;

  std::size_t conv_index = 0;
  for (const auto& l : spec.layers) {
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      if (conv_index >= weights.conv.size()) throw ConfigError("missing conv weights");
      x = conv_layer_forward(x, *c, weights.conv[conv_index++]);
    } else if (std::holds_alternative<ReluSpec>(l)) {
      x = relu_forward(std::move(x));
    } else if (const auto* p = std::get_if<PoolSpec>(&l)) {
      x = max_pool_forward(x, *p);
    } else if (const auto* n = std::get_if<LrnSpec>(&l)) {
      x = lrn_forward(x, *n);
    }
  }
  return x;
}

FlopReport count_flops(const ConvBackboneSpec& spec, int input_side) {
  if (!output_side(spec, input_side))
    throw ConfigError("input side " + std::to_string(input_side) + " invalid for backbone");
  FlopReport r;
  int n = input_side;
  int ch = spec.input_channels;
  for (const auto& l : spec.layers) {
    LayerFlops lf;
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      n = spatial_out(n, c->kernel, c->stride, c->padding);
      lf.kind = "conv";
      lf.ops = static_cast<std::uint64_t>(n) * n * c->kernel * c->kernel * c->in_channels *
               c->out_channels;
      r.conv_macs += lf.ops;
      ch = c->out_channels;
    } else if (const auto* p = std::get_if<PoolSpec>(&l)) {
      n = spatial_out(n, p->window, p->stride, 0);
      lf.kind = "pool";
      lf.ops = static_cast<std::uint64_t>(n) * n * ch * p->window * p->window;
      r.pool_ops += lf.ops;
    } else if (const auto* lr = std::get_if<LrnSpec>(&l)) {
      lf.kind = "lrn";
      lf.ops = static_cast<std::uint64_t>(n) * n * ch * lr->n;
      r.lrn_ops += lf.ops;
    } else {
      lf.kind = "relu";
      lf.ops = 0;
    }
    lf.output_side = n;
    r.layers.push_back(lf);
  }
  return r;
}

}  // namespace ilnet
