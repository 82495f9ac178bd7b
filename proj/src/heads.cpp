#include "ilnet/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ilnet/error.hpp"

namespace ilnet {

HeadParams make_head(int input_dim, std::span<const int> hidden, int outputs, Rng& rng) {
  if (input_dim < 1 || outputs < 1) throw ConfigError("head dimensions must be positive");
  HeadParams head;
  int in = input_dim;
  auto add = [&](int out, double stddev) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    std::normal_distribution<float> dist(0.0f, static_cast<float>(stddev));
    l.weights.resize(static_cast<std::size_t>(in) * out);
    for (auto& v : l.weights) v = dist(rng);
    l.bias.assign(static_cast<std::size_t>(out), 0.0f);
    head.layers.push_back(std::move(l));
    in = out;
  };
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden layer width must be positive");
    add(h, std::sqrt(2.0 / in));
  }
  add(outputs, 0.01);
  return head;
}

namespace {

void check_input(const HeadParams& head, std::size_t n) {
  if (head.layers.empty()) throw ConfigError("head has no layers");
  if (n != static_cast<std::size_t>(head.input_dim()))
    throw ConfigError("head expects " + std::to_string(head.input_dim()) + " features, got " +
                      std::to_string(n));
}

// Activations per layer (index 0 = input); pre-activations for hidden layers.
struct Trace {
  std::vector<std::vector<double>> act;
  std::vector<std::vector<double>> pre;
};

void forward_trace(const HeadParams& head, FeatureView x, Trace& t) {
  t.act.resize(head.layers.size() + 1);
  t.pre.resize(head.layers.size());
  t.act[0].assign(x.begin(), x.end());
  for (std::size_t li = 0; li < head.layers.size(); ++li) {
    const auto& l = head.layers[li];
    auto& z = t.pre[li];
    z.resize(static_cast<std::size_t>(l.out));
    const auto& a = t.act[li];
    for (int o = 0; o < l.out; ++o) {
      const float* w = &l.weights[static_cast<std::size_t>(o) * l.in];
      double s = l.bias[o];
      for (int i = 0; i < l.in; ++i) s += w[i] * a[i];
      z[o] = s;
    }
    auto& next = t.act[li + 1];
    next = z;
    if (li + 1 < head.layers.size())
      for (auto& v : next) v = std::max(v, 0.0);
  }
}

}  // namespace

std::vector<double> head_forward(const HeadParams& head, FeatureView features) {
  check_input(head, features.size());
  Trace t;
  forward_trace(head, features, t);
  return t.act.back();
}

std::vector<double> head_forward(const HeadParams& head, const FeatureMap& window) {
  return head_forward(head, FeatureView(window.values));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - m);
  for (auto& v : p) v /= sum;
  return p;
}

double object_probability(const HeadParams& head, FeatureView features) {
  const auto z = head_forward(head, features);
  if (z.size() != 2) throw ConfigError("object head must emit 2 logits");
  // 1 / (1 + e^(z0 - z1)), same value as the two-class softmax.
  return 1.0 / (1.0 + std::exp(z[0] - z[1]));
}

double head_loss_and_gradient(const HeadParams& head, std::span<const FeatureView> batch,
                              std::span<const int> labels, HeadGradient* grad) {
  if (batch.size() != labels.size()) throw InputError("batch and label counts differ");
  if (batch.empty()) throw InputError("empty batch");
  const std::size_t nl = head.layers.size();
  if (grad) {
    grad->weights.resize(nl);
    grad->bias.resize(nl);
    for (std::size_t li = 0; li < nl; ++li) {
      grad->weights[li].assign(head.layers[li].weights.size(), 0.0);
      grad->bias[li].assign(head.layers[li].bias.size(), 0.0);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Trace t;
  std::vector<double> delta, prev_delta;
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    check_input(head, batch[bi].size());
    forward_trace(head, batch[bi], t);
    const int y = labels[bi];
    if (y < 0 || y >= head.output_dim()) throw InputError("label out of range");
    const auto p = softmax(t.act.back());
    loss -= std::log(std::max(p[y], 1e-300));
    if (!grad) continue;
    delta = p;
    delta[y] -= 1.0;
    for (auto& d : delta) d *= inv_n;
    for (std::size_t li = nl; li-- > 0;) {
      const auto& l = head.layers[li];
      const auto& a = t.act[li];
      auto& gw = grad->weights[li];
      auto& gb = grad->bias[li];
      for (int o = 0; o < l.out; ++o) {
        gb[o] += delta[o];
        double* row = &gw[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) row[i] += delta[o] * a[i];
      }
      if (li == 0) break;
      prev_delta.assign(static_cast<std::size_t>(l.in), 0.0);
      for (int o = 0; o < l.out; ++o) {
        const float* w = &l.weights[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) prev_delta[i] += w[i] * delta[o];
      }
      const auto& z = t.pre[li - 1];
      for (int i = 0; i < l.in; ++i)
        if (z[i] <= 0) prev_delta[i] = 0.0;
      delta.swap(prev_delta);
    }
  }
  return loss * inv_n;
}

void SgdConfig::validate() const {
  if (!(lr_hidden >= 0) || !(lr_final >= 0)) throw ConfigError("learning rates must be >= 0");
  if (object_batch < 1 || loc_batch < 1) throw ConfigError("minibatch sizes must be >= 1");
  if (iterations < 0) throw ConfigError("iteration count must be >= 0");
}

double sgd_step(HeadParams& head, MomentumState& state, std::span<const FeatureView> batch,
                std::span<const int> labels, const SgdConfig& config) {
  HeadGradient g;
  const double loss = head_loss_and_gradient(head, batch, labels, &g);
  const std::size_t nl = head.layers.size();
  if (state.weights.size() != nl) {
    state.weights.resize(nl);
    state.bias.resize(nl);
    for (std::size_t li = 0; li < nl; ++li) {
      state.weights[li].assign(head.layers[li].weights.size(), 0.0);
      state.bias[li].assign(head.layers[li].bias.size(), 0.0);
    }
  }
  for (std::size_t li = 0; li < nl; ++li) {
    auto& l = head.layers[li];
    const double lr = li + 1 == nl ? config.lr_final : config.lr_hidden;
    auto& vw = state.weights[li];
    for (std::size_t i = 0; i < l.weights.size(); ++i) {
      const double gi = g.weights[li][i] + config.weight_decay * l.weights[i];
      vw[i] = config.momentum * vw[i] - lr * gi;
      l.weights[i] = static_cast<float>(l.weights[i] + vw[i]);
    }
    auto& vb = state.bias[li];
    for (std::size_t i = 0; i < l.bias.size(); ++i) {
      vb[i] = config.momentum * vb[i] - lr * g.bias[li][i];
      l.bias[i] = static_cast<float>(l.bias[i] + vb[i]);
    }
  }
  return loss;
}

std::vector<std::size_t> select_hard_negatives(std::span<const double> positive_prob, int keep) {
  std::vector<std::size_t> idx(positive_prob.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return positive_prob[a] > positive_prob[b];
  });
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(std::max(keep, 0))));
  return idx;
}

namespace {

// Endless reshuffled walk over [0, n).
class Cycler {
 public:
  Cycler(std::size_t n, Rng& rng) : rng_(rng), order_(n) { reshuffle(); }
  std::size_t next() {
    if (pos_ == order_.size()) reshuffle();
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<double> train_object_head(HeadParams& head, MomentumState& state,
                                      std::span<const FeatureView> positives,
                                      std::span<const FeatureView> negatives,
                                      const SgdConfig& config, Rng& rng,
                                      const HardNegativeMiner& miner, bool mine) {
  config.validate();
  if (positives.empty()) throw TrainingError("no training samples for class 'object'");
  if (negatives.empty()) throw TrainingError("no training samples for class 'background'");
  const int n_neg = std::min(miner.keep, config.object_batch - 1);
  const int n_pos = config.object_batch - n_neg;
  Cycler pos_walk(positives.size(), rng);
  Cycler neg_walk(negatives.size(), rng);
  std::vector<double> trace;
  std::vector<FeatureView> batch;
  std::vector<int> labels;
  std::vector<std::size_t> pool;
  std::vector<double> prob;
  for (int it = 0; it < config.iterations; ++it) {
    batch.clear();
    labels.clear();
    for (int i = 0; i < n_pos; ++i) {
      batch.push_back(positives[pos_walk.next()]);
      labels.push_back(1);
    }
    const int pool_size = mine ? std::min<int>(miner.pool, static_cast<int>(negatives.size()))
                               : n_neg;
    pool.clear();
    for (int i = 0; i < pool_size; ++i) pool.push_back(neg_walk.next());
    if (mine) {
      // Bank order breaks ties among equal scores.
      std::sort(pool.begin(), pool.end());
      prob.resize(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i)
        prob[i] = object_probability(head, negatives[pool[i]]);
      for (std::size_t i : select_hard_negatives(prob, n_neg)) {
        batch.push_back(negatives[pool[i]]);
        labels.push_back(0);
      }
    } else {
      for (std::size_t i : pool) {
        batch.push_back(negatives[i]);
        labels.push_back(0);
      }
    }
    trace.push_back(sgd_step(head, state, batch, labels, config));
  }
  return trace;
}

std::vector<double> train_localization_head(HeadParams& head, MomentumState& state,
                                            std::span<const FeatureView> features,
                                            std::span<const int> labels,
                                            const SgdConfig& config, Rng& rng) {
  config.validate();
  if (features.size() != labels.size()) throw InputError("feature and label counts differ");
  const int classes = head.output_dim();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw InputError("label out of range");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < classes; ++c)
    if (by_class[c].empty())
      throw TrainingError("no training samples for class '" +
                          (classes == kLocClassCount ? std::string(to_string(LocClass(c)))
                                                     : std::to_string(c)) +
                          "'");
  const int per_class = std::max(1, config.loc_batch / classes);
  std::vector<Cycler> walks;
  for (int c = 0; c < classes; ++c) walks.emplace_back(by_class[c].size(), rng);
  std::vector<double> trace;
  std::vector<FeatureView> batch;
  std::vector<int> batch_labels;
  for (int it = 0; it < config.iterations; ++it) {
    batch.clear();
    batch_labels.clear();
    for (int c = 0; c < classes; ++c)
      for (int i = 0; i < per_class; ++i) {
        batch.push_back(features[by_class[c][walks[c].next()]]);
        batch_labels.push_back(c);
      }
    trace.push_back(sgd_step(head, state, batch, batch_labels, config));
  }
  return trace;
}

}  // namespace ilnet
