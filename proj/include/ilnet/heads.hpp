#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ilnet/feature_map.hpp"
#include "ilnet/geometry.hpp"

namespace ilnet {

// Weight layout (out, in).
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<float> weights;
  std::vector<float> bias;
};

// Fully connected stack with ReLU between layers; the last layer emits logits.
struct HeadParams {
  std::vector<DenseLayer> layers;
  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

inline constexpr int kObjectClasses = 2;  // 0 background, 1 object

HeadParams make_head(int input_dim, std::span<const int> hidden, int outputs, Rng& rng);

using FeatureView = std::span<const float>;

std::vector<double> head_forward(const HeadParams& head, FeatureView features);
std::vector<double> head_forward(const HeadParams& head, const FeatureMap& window);

// Stable softmax (max logit subtracted first).
std::vector<double> softmax(std::span<const double> logits);

// Softmax probability of class 1 from a 2-logit head.
double object_probability(const HeadParams& head, FeatureView features);

struct HeadGradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

// Mean softmax cross-entropy over the batch; fills `grad` when non-null.
double head_loss_and_gradient(const HeadParams& head, std::span<const FeatureView> batch,
                              std::span<const int> labels, HeadGradient* grad);

struct SgdConfig {
  double lr_hidden = 1e-3;
  double lr_final = 1e-2;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int object_batch = 128;
  int loc_batch = 65;
  int iterations = 90;
  void validate() const;
};

struct MomentumState {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

// One momentum step with weight decay on the weight matrices. Returns the batch loss
// measured before the step.
double sgd_step(HeadParams& head, MomentumState& state, std::span<const FeatureView> batch,
                std::span<const int> labels, const SgdConfig& config);

struct HardNegativeMiner {
  int pool = 1024;
  int keep = 96;
};

// Indices of the `keep` highest probabilities; ties resolved by lower index first.
// Returned in ranking order.
std::vector<std::size_t> select_hard_negatives(std::span<const double> positive_prob, int keep);

// Object head: each minibatch holds object_batch - miner.keep positives plus miner.keep
// negatives (mined from a pool of miner.pool when mining is enabled).
std::vector<double> train_object_head(HeadParams& head, MomentumState& state,
                                      std::span<const FeatureView> positives,
                                      std::span<const FeatureView> negatives,
                                      const SgdConfig& config, Rng& rng,
                                      const HardNegativeMiner& miner, bool mine = true);

// Localization head: loc_batch / 5 samples per class each step.
std::vector<double> train_localization_head(HeadParams& head, MomentumState& state,
                                            std::span<const FeatureView> features,
                                            std::span<const int> labels,
                                            const SgdConfig& config, Rng& rng);

}  // namespace ilnet
