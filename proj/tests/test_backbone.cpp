#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "ilnet/backbone.hpp"
#include "ilnet/error.hpp"
#include "ilnet/heads.hpp"
#include "ilnet/model.hpp"
#include "oracles.hpp"

using namespace ilnet;

namespace {

FeatureMap random_map(int h, int w, int c, Rng& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  FeatureMap m(h, w, c);
  for (auto& v : m.values) v = static_cast<float>(u(rng));
  return m;
}

Image random_image(int side, int channels, Rng& rng) {
  std::uniform_int_distribution<int> u(0, 255);
  Image img(side, side, channels);
  for (auto& v : img.values) v = static_cast<float>(u(rng));
  return img;
}

ConvParams random_params(const ConvSpec& s, Rng& rng) {
  std::normal_distribution<double> n(0, 0.3);
  ConvParams p;
  p.weights.resize(static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel);
  p.bias.resize(s.out_channels);
  for (auto& v : p.weights) v = static_cast<float>(n(rng));
  for (auto& v : p.bias) v = static_cast<float>(n(rng));
  return p;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - b[i]));
  return m;
}

HeadParams linear_head(int in, int out, std::vector<float> w, std::vector<float> b) {
  HeadParams h;
  h.layers.push_back(DenseLayer{in, out, std::move(w), std::move(b)});
  return h;
}

}  // namespace

// ---------------------------------------------------------------- layers

TEST(Conv, IdentityKernel) {
  FeatureMap in(1, 1, 1, 3.25f);
  const auto out = conv_layer_forward(in, {1, 1, 1, 1, 0}, {{1.0f}, {0.0f}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FLOAT_EQ(out.values[0], 3.25f);
}

TEST(Conv, AllOnesThreeByThree) {
  FeatureMap in(3, 3, 1, 1.0f);
  const auto out = conv_layer_forward(in, {3, 1, 1, 1, 0}, {std::vector<float>(9, 1.0f), {0.0f}});
  ASSERT_EQ(out.height, 1);
  ASSERT_EQ(out.width, 1);
  EXPECT_FLOAT_EQ(out.values[0], 9.0f);
}

TEST(Conv, ReferenceConv1OutputSide) {
  const auto spec = reference_spec(4, 4, 4, 3);
  const auto c1 = spec.conv_layers().front();
  Rng rng(1);
  const auto out =
      conv_layer_forward(FeatureMap(107, 107, 3, 0.5f), c1, random_params(c1, rng));
  EXPECT_EQ(out.height, 51);
  EXPECT_EQ(out.width, 51);
  EXPECT_EQ(out.channels, 4);
}

TEST(Conv, MatchesDirectOracle) {
  Rng rng(2);
  for (const ConvSpec s : {ConvSpec{3, 1, 2, 3, 0}, ConvSpec{5, 2, 3, 4, 0}, ConvSpec{3, 2, 2, 2, 1},
                           ConvSpec{7, 2, 1, 5, 0}}) {
    const auto in = random_map(19, 19, s.in_channels, rng);
    const auto p = random_params(s, rng);
    const auto got = conv_layer_forward(in, s, p);
    const auto want = oracle::conv(in, s, p);
    ASSERT_EQ(got.height, want.height);
    ASSERT_EQ(got.width, want.width);
    EXPECT_LE(max_abs_diff(got.values, want.values), 1e-5);
  }
}

TEST(Conv, ShapeErrors) {
  EXPECT_THROW(conv_layer_forward(FeatureMap(2, 2, 1), {3, 1, 1, 1, 0},
                                  {std::vector<float>(9), {0.0f}}),
               ConfigError);
  EXPECT_THROW(conv_layer_forward(FeatureMap(5, 5, 2), {3, 1, 1, 1, 0},
                                  {std::vector<float>(9), {0.0f}}),
               ConfigError);
}

TEST(Pool, HandEnumeration) {
  FeatureMap in(5, 5, 1);
  for (int i = 0; i < 25; ++i) in.values[i] = float(i + 1);
  const auto out = max_pool_forward(in, {3, 2});
  ASSERT_EQ(out.height, 2);
  ASSERT_EQ(out.width, 2);
  EXPECT_EQ(out.values, (std::vector<float>{13, 15, 23, 25}));
}

TEST(Pool, ConstantMapAndOracle) {
  const auto out = max_pool_forward(FeatureMap(9, 9, 3, -1.5f), {3, 2});
  EXPECT_EQ(out.height, 4);
  for (float v : out.values) EXPECT_FLOAT_EQ(v, -1.5f);
  Rng rng(3);
  const auto m = random_map(17, 13, 4, rng);
  EXPECT_EQ(max_pool_forward(m, {3, 2}).values, oracle::pool(m, {3, 2}).values);
}

TEST(Pool, WindowLargerThanInputThrows) {
  EXPECT_THROW(max_pool_forward(FeatureMap(2, 2, 1), {3, 2}), ConfigError);
}

TEST(Relu, ClampsNegatives) {
  FeatureMap m(1, 3, 1);
  m.values = {-2.0f, 0.0f, 1.5f};
  EXPECT_EQ(relu_forward(m).values, (std::vector<float>{0.0f, 0.0f, 1.5f}));
}

TEST(Lrn, MatchesFormula) {
  Rng rng(4);
  const auto m = random_map(4, 4, 12, rng, -5, 5);
  const LrnSpec s{5, 2.0, 1e-1, 0.75};
  EXPECT_LE(max_abs_diff(lrn_forward(m, s).values, oracle::lrn(m, s).values), 1e-6);
  EXPECT_THROW(lrn_forward(m, {0, 2.0, 1e-4, 0.75}), ConfigError);
}

// ---------------------------------------------------------------- backbone

TEST(Backbone, ReferenceGeometrySizes) {
  for (const auto& spec : {desk_spec(1), vggm_geometry_spec(3)}) {
    EXPECT_EQ(output_side(spec, 107), 3);
    EXPECT_EQ(output_side(spec, 139), 5);
    EXPECT_EQ(output_side(spec, 299), 15);
  }
  EXPECT_EQ(vggm_geometry_spec().output_channels(), 512);
  EXPECT_EQ(desk_spec().output_channels(), 32);
}

TEST(Backbone, ForwardShapesAndProvenance) {
  const auto spec = desk_spec(1);
  Rng rng(5);
  const auto w = init_backbone_weights(spec, rng);
  const auto t = roi_crop_transform({10, 10, 30, 30}, 1.2, 139, 100, 100);
  for (auto [side, cells] : {std::pair{107, 3}, {139, 5}, {299, 15}}) {
    const auto map = backbone_forward(random_image(side, 1, rng), spec, w, t, 1.2);
    EXPECT_EQ(map.height, cells);
    EXPECT_EQ(map.width, cells);
    EXPECT_EQ(map.channels, 32);
    EXPECT_DOUBLE_EQ(map.scale, 1.2);
    ASSERT_TRUE(map.transform.has_value());
    EXPECT_EQ(map.transform->dest_side, 139);
  }
}

TEST(Backbone, MatchesLayerByLayerOracle) {
  const auto spec = desk_spec(1);
  Rng rng(6);
  const auto w = init_backbone_weights(spec, rng);
  const Image crop = random_image(107, 1, rng);
  const auto got = backbone_forward(crop, spec, w);
  const auto want = oracle::forward(crop, spec, w);
  double scale = 1e-6;
  for (float v : want.values) scale = std::max(scale, double(std::abs(v)));
  EXPECT_LE(max_abs_diff(got.values, want.values) / scale, 1e-5);
}

TEST(Backbone, CropErrors) {
  const auto spec = desk_spec(1);
  Rng rng(7);
  const auto w = init_backbone_weights(spec, rng);
  EXPECT_THROW(backbone_forward(Image(60, 60, 1), spec, w), InputError);
  EXPECT_THROW(backbone_forward(Image(107, 100, 1), spec, w), InputError);
  EXPECT_THROW(backbone_forward(Image(107, 107, 3), spec, w), InputError);
}

TEST(Backbone, IntegerShiftEquivalence) {
  const auto spec = desk_spec(1);
  Rng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const auto w = init_backbone_weights(spec, rng);
    const int j = 2 * (trial % 3 + 1);
    const int side = 107 + 16 * j;
    const Image big = random_image(side, 1, rng);
    const auto map = backbone_forward(big, spec, w);
    for (int a = 0; a <= j; a += j / 2)
      for (int b = 0; b <= j; b += j / 2) {
        Image sub(107, 107, 1);
        for (int r = 0; r < 107; ++r)
          for (int c = 0; c < 107; ++c) sub.at(r, c) = big.at(16 * b + r, 16 * a + c);
        const auto direct = backbone_forward(sub, spec, w);
        std::vector<float> win;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 32; ++k) win.push_back(map.at(b + r, a + c, k));
        EXPECT_LE(max_abs_diff(win, direct.values), 1e-4) << "j=" << j << " a=" << a << " b=" << b;
      }
  }
}

TEST(Backbone, DeterministicGivenSeed) {
  const auto spec = desk_spec(1);
  Rng r1(9), r2(9);
  const auto w1 = init_backbone_weights(spec, r1);
  const auto w2 = init_backbone_weights(spec, r2);
  Rng ri(10);
  const Image crop = random_image(139, 1, ri);
  EXPECT_EQ(backbone_forward(crop, spec, w1).values, backbone_forward(crop, spec, w2).values);
}

// ---------------------------------------------------------------- FLOPs

TEST(Flops, SingleOneByOneConv) {
  ConvBackboneSpec s;
  s.layers = {ConvSpec{1, 1, 1, 1, 0}};
  EXPECT_EQ(count_flops(s, 5).conv_macs, 25u);
}

TEST(Flops, HandCountedLayers) {
  ConvBackboneSpec s;
  s.input_channels = 2;
  s.layers = {ConvSpec{3, 1, 2, 4, 0}, PoolSpec{2, 2}, LrnSpec{3, 2, 1e-4, 0.75}};
  const auto r = count_flops(s, 10);
  EXPECT_EQ(r.conv_macs, 8u * 8 * 9 * 2 * 4);
  EXPECT_EQ(r.pool_ops, 4u * 4 * 4 * 4);
  EXPECT_EQ(r.lrn_ops, 4u * 4 * 4 * 3);
  EXPECT_THROW(count_flops(s, 2), ConfigError);
}

TEST(Flops, ReferenceRatioAndMonotone) {
  for (const auto& spec : {vggm_geometry_spec(), desk_spec()}) {
    const double m107 = count_flops(spec, 107).conv_macs;
    const double m139 = count_flops(spec, 139).conv_macs;
    const double m299 = count_flops(spec, 299).conv_macs;
    EXPECT_GE(169.0 * m107 / m299, 10.0);
    EXPECT_GT(m299, m139);
    EXPECT_GT(m139, m107);
  }
}

// ---------------------------------------------------------------- heads

TEST(Head, ZeroWeightsGiveZeroLogits) {
  const auto h = linear_head(4, 2, std::vector<float>(8, 0.0f), {0.0f, 0.0f});
  const std::vector<float> x{1, 2, 3, 4};
  EXPECT_EQ(head_forward(h, x), (std::vector<double>{0.0, 0.0}));
}

TEST(Head, OneHotSelector) {
  std::vector<float> w(2 * 6, 0.0f);
  w[0 * 6 + 4] = 1.0f;
  const auto h = linear_head(6, 2, w, {0.0f, 0.0f});
  const std::vector<float> x{0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f};
  EXPECT_FLOAT_EQ(static_cast<float>(head_forward(h, x)[0]), 0.5f);
}

TEST(Head, HandBuiltTwoLayer) {
  // x = 2; hidden = relu([1, -1] x + [0.5, 0]) = [2.5, 0]; logits = [[2, 3], [-1, 1]] h + [0, 1].
  HeadParams h;
  h.layers.push_back(DenseLayer{1, 2, {1.0f, -1.0f}, {0.5f, 0.0f}});
  h.layers.push_back(DenseLayer{2, 2, {2.0f, 3.0f, -1.0f, 1.0f}, {0.0f, 1.0f}});
  const std::vector<float> x{2.0f};
  const auto z = head_forward(h, x);
  EXPECT_DOUBLE_EQ(z[0], 5.0);
  EXPECT_DOUBLE_EQ(z[1], -1.5);
}

TEST(Head, MatchesOracleAndRejectsWrongDim) {
  Rng rng(12);
  const std::vector<int> hidden{7, 5};
  const auto h = make_head(20, hidden, 5, rng);
  std::vector<float> x(20);
  std::normal_distribution<double> n;
  for (auto& v : x) v = float(n(rng));
  const auto got = head_forward(h, x);
  const auto want = oracle::head(h, x);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  const std::vector<float> bad(19);
  EXPECT_THROW(head_forward(h, bad), ConfigError);
}

TEST(Softmax, Examples) {
  const auto a = softmax(std::vector<double>{0.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  const auto b = softmax(std::vector<double>{std::log(3.0), 0.0});
  EXPECT_NEAR(b[0], 0.75, 1e-15);
  EXPECT_NEAR(b[1], 0.25, 1e-15);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(13);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(2 + t % 4);
    for (auto& v : z) v = u(rng);
    auto shifted = z;
    for (auto& v : shifted) v += 10.0;
    const auto p = softmax(z), q = softmax(shifted);
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GT(p[i], 0.0);
      EXPECT_NEAR(p[i], q[i], 1e-12);
      s += p[i];
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  const auto big = softmax(std::vector<double>{1000.0, 999.0});
  EXPECT_TRUE(std::isfinite(big[0]));
}

TEST(Gradient, CentralDifferencesBothHeads) {
  Rng rng(14);
  for (int outputs : {2, 5}) {
    const std::vector<int> hidden{6, 4};
    HeadParams h = make_head(10, hidden, outputs, rng);
    std::normal_distribution<double> n(0, 0.5);
    for (auto& l : h.layers) {
      for (auto& v : l.weights) v = float(n(rng));
      for (auto& v : l.bias) v = float(0.3 + 0.2 * n(rng));
    }
    std::vector<std::vector<float>> xs(6, std::vector<float>(10));
    for (auto& x : xs)
      for (auto& v : x) v = float(n(rng));
    std::vector<FeatureView> batch(xs.begin(), xs.end());
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) labels.push_back(i % outputs);
    HeadGradient g;
    head_loss_and_gradient(h, batch, labels, &g);
    double worst = 0;
    for (std::size_t li = 0; li < h.layers.size(); ++li) {
      auto check = [&](std::vector<float>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          const float orig = params[i];
          const float step = 1e-3f * std::max(1.0f, std::abs(orig));
          const float up = orig + step, dn = orig - step;
          params[i] = up;
          const double lu = head_loss_and_gradient(h, batch, labels, nullptr);
          params[i] = dn;
          const double ld = head_loss_and_gradient(h, batch, labels, nullptr);
          params[i] = orig;
          const double num = (lu - ld) / (double(up) - double(dn));
          const double rel = std::abs(num - analytic[i]) /
                             std::max({std::abs(num), std::abs(analytic[i]), 1e-4});
          worst = std::max(worst, rel);
        }
      };
      check(h.layers[li].weights, g.weights[li]);
      check(h.layers[li].bias, g.bias[li]);
    }
    EXPECT_LE(worst, 1e-3) << outputs << " outputs";
  }
}

TEST(Sgd, SingleSampleLinearStepMatchesHandGradient) {
  // Logits z = W x + b with x = (1, 2), W = 0, b = 0, label 1: p = (0.5, 0.5),
  // dL/dz = p - e1 = (0.5, -0.5), dL/dW = dz x^T, dL/db = dz.
  HeadParams h = linear_head(2, 2, {0, 0, 0, 0}, {0, 0});
  MomentumState st;
  SgdConfig c;
  c.lr_final = 0.1;
  c.weight_decay = 0.0;
  const std::vector<float> x{1.0f, 2.0f};
  const std::vector<FeatureView> batch{x};
  const std::vector<int> labels{1};
  const double loss = sgd_step(h, st, batch, labels, c);
  EXPECT_NEAR(loss, std::log(2.0), 1e-12);
  const std::vector<float> want_w{-0.05f, -0.1f, 0.05f, 0.1f};
  for (int i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(h.layers[0].weights[i], want_w[i]);
  EXPECT_FLOAT_EQ(h.layers[0].bias[0], -0.05f);
  EXPECT_FLOAT_EQ(h.layers[0].bias[1], 0.05f);
}

TEST(Sgd, MomentumAndWeightDecay) {
  HeadParams h = linear_head(1, 2, {1.0f, -1.0f}, {0.0f, 0.0f});
  MomentumState st;
  SgdConfig c;
  c.lr_final = 0.1;
  c.momentum = 0.9;
  c.weight_decay = 0.5;
  const std::vector<float> x{0.0f};  // zero input: only decay moves the weights
  const std::vector<FeatureView> batch{x};
  const std::vector<int> labels{0};
  sgd_step(h, st, batch, labels, c);
  EXPECT_FLOAT_EQ(h.layers[0].weights[0], 1.0f - 0.05f);
  // v2 = 0.9 * (-0.05) - 0.1 * 0.5 * 0.95
  sgd_step(h, st, batch, labels, c);
  EXPECT_NEAR(h.layers[0].weights[0], 0.95 + 0.9 * -0.05 - 0.1 * 0.5 * 0.95, 1e-6);
}

TEST(Training, ZeroLearningRateLeavesParameters) {
  Rng rng(15);
  const std::vector<int> hidden{8};
  HeadParams h = make_head(6, hidden, 2, rng);
  const HeadParams before = h;
  std::vector<std::vector<float>> pos(20, std::vector<float>(6, 1.0f)),
      neg(200, std::vector<float>(6, -1.0f));
  std::vector<FeatureView> pv(pos.begin(), pos.end()), nv(neg.begin(), neg.end());
  SgdConfig c;
  c.lr_hidden = c.lr_final = 0.0;
  c.weight_decay = 0.0;
  c.iterations = 5;
  MomentumState st;
  const auto trace = train_object_head(h, st, pv, nv, c, rng, {100, 96}, true);
  ASSERT_EQ(trace.size(), 5u);
  for (double v : trace) EXPECT_DOUBLE_EQ(v, trace.front());
  for (std::size_t l = 0; l < h.layers.size(); ++l) {
    EXPECT_EQ(h.layers[l].weights, before.layers[l].weights);
    EXPECT_EQ(h.layers[l].bias, before.layers[l].bias);
  }
}

TEST(Training, TwoGaussianBlobsSeparate) {
  Rng rng(16);
  const int dim = 16;
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<float>> pos(500, std::vector<float>(dim)), neg(2000, std::vector<float>(dim));
  for (auto& x : pos)
    for (int i = 0; i < dim; ++i) x[i] = float(n(rng) + (i < 4 ? 2.0 : 0.0));
  for (auto& x : neg)
    for (int i = 0; i < dim; ++i) x[i] = float(n(rng) - (i < 4 ? 2.0 : 0.0));
  std::vector<FeatureView> pv(pos.begin(), pos.end()), nv(neg.begin(), neg.end());
  const std::vector<int> hidden{32, 32};
  HeadParams h = make_head(dim, hidden, 2, rng);
  MomentumState st;
  const auto trace = train_object_head(h, st, pv, nv, SgdConfig{}, rng, {1024, 96}, true);
  ASSERT_EQ(trace.size(), 90u);
  EXPECT_LT(trace.back(), trace.front());
  int correct = 0;
  for (const auto& x : pos) correct += object_probability(h, x) > 0.5;
  for (const auto& x : neg) correct += object_probability(h, x) <= 0.5;
  EXPECT_GT(correct / 2500.0, 0.95);
}

TEST(Training, EmptyClassNamesTheClass) {
  Rng rng(17);
  const std::vector<int> hidden{4};
  HeadParams h = make_head(3, hidden, 5, rng);
  std::vector<std::vector<float>> xs(10, std::vector<float>(3, 0.5f));
  std::vector<FeatureView> v(xs.begin(), xs.end());
  std::vector<int> labels(10, 0);
  for (int i = 0; i < 10; ++i) labels[i] = i % 4;  // class 4 missing
  MomentumState st;
  try {
    train_localization_head(h, st, v, labels, SgdConfig{}, rng);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("middle"), std::string::npos) << e.what();
  }
}

TEST(Training, DeterministicGivenSeed) {
  auto run = [] {
    Rng rng(18);
    const std::vector<int> hidden{8};
    HeadParams h = make_head(4, hidden, 2, rng);
    std::normal_distribution<double> n;
    std::vector<std::vector<float>> pos(50, std::vector<float>(4)), neg(300, std::vector<float>(4));
    for (auto& x : pos)
      for (auto& v : x) v = float(n(rng) + 1);
    for (auto& x : neg)
      for (auto& v : x) v = float(n(rng) - 1);
    std::vector<FeatureView> pv(pos.begin(), pos.end()), nv(neg.begin(), neg.end());
    SgdConfig c;
    c.iterations = 10;
    MomentumState st;
    train_object_head(h, st, pv, nv, c, rng, {256, 96}, true);
    return h.layers.back().weights;
  };
  EXPECT_EQ(run(), run());
}

// ---------------------------------------------------------------- mining

TEST(Mining, TopKMatchesSortOracle) {
  Rng rng(19);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(1024);
    for (auto& v : p) v = t % 3 == 0 ? std::round(u(rng) * 10) / 10 : u(rng);  // ties on some pools
    const auto got = select_hard_negatives(p, 96);
    EXPECT_EQ(got, oracle::top_k(p, 96));
    double min_sel = 1;
    for (auto i : got) min_sel = std::min(min_sel, p[i]);
    std::vector<bool> chosen(p.size());
    for (auto i : got) chosen[i] = true;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!chosen[i]) EXPECT_LE(p[i], min_sel);
  }
}

TEST(Mining, SmallPool) {
  const std::vector<double> p{0.2, 0.9, 0.5};
  EXPECT_EQ(select_hard_negatives(p, 96), (std::vector<std::size_t>{1, 2, 0}));
}

// ---------------------------------------------------------------- weight file

namespace {

NetworkModel small_model(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<int> hidden{16, 16};
  return make_model(desk_spec(1), hidden, rng);
}

}  // namespace

TEST(WeightFile, RoundTripBitExact) {
  const auto m = small_model(20);
  const auto bytes = save_weights(m);
  ASSERT_EQ(std::memcmp(bytes.data(), "ILNW", 4), 0);
  const auto back = load_weights(bytes, small_model(21));
  for (std::size_t i = 0; i < m.conv.conv.size(); ++i) {
    EXPECT_EQ(back.conv.conv[i].weights, m.conv.conv[i].weights);
    EXPECT_EQ(back.conv.conv[i].bias, m.conv.conv[i].bias);
  }
  for (std::size_t i = 0; i < m.object_head.layers.size(); ++i)
    EXPECT_EQ(back.object_head.layers[i].weights, m.object_head.layers[i].weights);
  for (std::size_t i = 0; i < m.loc_head.layers.size(); ++i)
    EXPECT_EQ(back.loc_head.layers[i].bias, m.loc_head.layers[i].bias);
  EXPECT_EQ(save_weights(back), bytes);
}

TEST(WeightFile, TruncatedStream) {
  const auto m = small_model(22);
  auto bytes = save_weights(m);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(load_weights(bytes, m), FormatError);
  EXPECT_THROW(load_weights(std::vector<std::uint8_t>(5), m), FormatError);
}

TEST(WeightFile, BadMagicAndCrc) {
  const auto m = small_model(23);
  auto bytes = save_weights(m);
  auto bad = bytes;
  bad[0] = 'X';
  try {
    load_weights(bad, m);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  bad = bytes;
  bad[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(load_weights(bad, m), FormatError);
}

TEST(WeightFile, ShapeMismatchNamesLayer) {
  Rng rng(24);
  const std::vector<int> hidden{16, 16};
  const auto other = make_model(reference_spec(8, 16, 24, 1), hidden, rng);
  try {
    load_weights(save_weights(other), small_model(25));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("conv3"), std::string::npos) << e.what();
  }
}
