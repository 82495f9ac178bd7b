#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ilnet/feature_map.hpp"
#include "ilnet/geometry.hpp"
#include "ilnet/image.hpp"

namespace ilnet {

struct ConvSpec {
  int kernel = 1;
  int stride = 1;
  int in_channels = 1;
  int out_channels = 1;
  int padding = 0;
};
struct ReluSpec {};
struct PoolSpec {
  int window = 2;
  int stride = 2;
};
struct LrnSpec {
  int n = 5;
  double kappa = 2.0;
  double alpha = 1e-4;
  double beta = 0.75;
};
using LayerSpec = std::variant<ConvSpec, ReluSpec, PoolSpec, LrnSpec>;

struct ConvBackboneSpec {
  std::vector<LayerSpec> layers;
  int input_channels = 1;
  // Network input = (pixel - input_mean) * input_scale. 1/32 brings typical 8-bit
  // contrast (std 30-40 levels) to roughly unit variance for the He-initialized filters.
  float input_mean = 128.0f;
  float input_scale = 1.0f / 32.0f;

  std::vector<ConvSpec> conv_layers() const;
  int output_channels() const;
};

// Kernel layout (out-channel, in-channel, kernel-row, kernel-col).
struct ConvParams {
  std::vector<float> weights;
  std::vector<float> bias;
};

struct BackboneWeights {
  std::vector<ConvParams> conv;  // one per ConvSpec, in layer order
};

// conv 7/2 -> relu -> lrn -> pool 3/2 -> conv 5/2 -> relu -> lrn -> pool 3/2 -> conv 3/1 -> relu.
ConvBackboneSpec reference_spec(int c1, int c2, int c3, int input_channels, LrnSpec lrn = {});
ConvBackboneSpec desk_spec(int input_channels = 1);          // 8, 16, 32 channels
ConvBackboneSpec vggm_geometry_spec(int input_channels = 3);  // 96, 256, 512 channels

BackboneWeights init_backbone_weights(const ConvBackboneSpec& spec, Rng& rng);

FeatureMap conv_layer_forward(const FeatureMap& input, const ConvSpec& layer,
                              const ConvParams& params);
FeatureMap relu_forward(FeatureMap input);
FeatureMap max_pool_forward(const FeatureMap& input, const PoolSpec& layer);
FeatureMap lrn_forward(const FeatureMap& input, const LrnSpec& layer);

// Spatial output side for a square input, or nullopt when some layer does not fit.
std::optional<int> output_side(const ConvBackboneSpec& spec, int input_side);

// Runs the conv stack on a square crop and returns the final map with provenance.
FeatureMap backbone_forward(const Image& crop, const ConvBackboneSpec& spec,
                            const BackboneWeights& weights,
                            const std::optional<CropTransform>& transform = std::nullopt,
                            double scale = 1.0);

struct LayerFlops {
  std::string kind;
  int output_side = 0;
  std::uint64_t ops = 0;
};
struct FlopReport {
  std::uint64_t conv_macs = 0;
  std::uint64_t pool_ops = 0;  // comparisons
  std::uint64_t lrn_ops = 0;   // multiply-adds in the channel sums
  std::vector<LayerFlops> layers;
};
FlopReport count_flops(const ConvBackboneSpec& spec, int input_side);

}  // namespace ilnet
