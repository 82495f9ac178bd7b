#include <algorithm>
#include <cmath>
#include <numeric>

#include "ilnet/backbone.hpp"
#include "ilnet/commands.hpp"
#include "ilnet/error.hpp"
#include "ilnet/heads.hpp"

namespace ilnet {

using nlohmann::ordered_json;

namespace {

CheckResult make_check(std::string name, std::string cmp, double tol, double observed) {
  CheckResult c;
  c.name = std::move(name);
  c.comparison = std::move(cmp);
  c.tolerance = tol;
  c.observed = observed;
  if (c.comparison == "<=") c.passed = observed <= tol;
  else if (c.comparison == ">=") c.passed = observed >= tol;
  else if (c.comparison == ">") c.passed = observed > tol;
  else c.passed = observed == tol;
  return c;
}

Image sub_image(const Image& img, int left, int top, int side) {
  Image out(side, side, img.channels);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      for (int k = 0; k < img.channels; ++k) out.at(r, c, k) = img.at(top + r, left + c, k);
  return out;
}

Image uniform_noise(int side, Rng& rng) {
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  Image img(side, side, 1);
  for (auto& v : img.values) v = u(rng);
  return img;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  if (a.values.size() != b.values.size()) return std::numeric_limits<double>::infinity();
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.values[i]) - b.values[i]));
  return m;
}

double cosine(const FeatureMap& a, const FeatureMap& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    ab += static_cast<double>(a.values[i]) * b.values[i];
    aa += static_cast<double>(a.values[i]) * a.values[i];
    bb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (aa == 0 && bb == 0) return 1.0;
  if (aa == 0 || bb == 0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

FeatureMap sample(const FeatureMap& map, const GridOffset& off, const VerifyOptions& opt) {
  return opt.corrupt_bilinear ? detail::sample_window_bilinear_skewed(map, off, 3, 0.25)
                              : sample_window_bilinear(map, off, 3);
}

FeatureMap random_map(int h, int w, int c, Rng& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  FeatureMap m(h, w, c);
  for (auto& v : m.values) v = n(rng);
  return m;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - i) * (v[j] - v[i]);
}

// Independent OPE recomputation with explicit per-frame loops.
OpeResult ope_reference(const std::vector<Box>& est, const std::vector<Box>& gt) {
  OpeResult r;
  const double n = static_cast<double>(est.size());
  for (int t = 0; t <= 50; ++t) {
    int hit = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double dx = (est[i].x + est[i].w / 2) - (gt[i].x + gt[i].w / 2);
      const double dy = (est[i].y + est[i].h / 2) - (gt[i].y + gt[i].h / 2);
      if (std::sqrt(dx * dx + dy * dy) <= t) ++hit;
    }
    r.precision.push_back(hit / n);
  }
  for (int k = 0; k <= 20; ++k) {
    const double th = k / 20.0;
    int hit = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const auto& a = est[i];
      const auto& b = gt[i];
      const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
      const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
      const double inter = iw * ih;
      const double uni = a.w * a.h + b.w * b.h - inter;
      const double o = inter / uni;
      if (k == 20 ? o >= 1.0 : o > th) ++hit;
    }
    r.success.push_back(hit / n);
  }
  r.precision_20 = r.precision[20];
  r.auc = std::accumulate(r.success.begin(), r.success.end(), 0.0) / 21.0;
  return r;
}

}  // namespace

CheckResult check_geometry_sizes() {
  Rng rng(11);
  const auto spec = desk_spec(1);
  const auto w = init_backbone_weights(spec, rng);
  ordered_json sizes = ordered_json::object();
  int mismatches = 0;
  for (auto [in, expect] : {std::pair{107, 3}, {139, 5}, {299, 15}}) {
    const FeatureMap m = backbone_forward(uniform_noise(in, rng), spec, w);
    sizes[std::to_string(in)] = {m.height, m.width};
    if (m.height != expect || m.width != expect) ++mismatches;
  }
  auto c = make_check("conv3_output_sizes", "==", 0, mismatches);
  c.details["sizes"] = sizes;
  return c;
}

CheckResult check_candidate_count() {
  const FeatureMap m(15, 15, 4, 1.0f);
  const auto cands = candidate_grid(m);
  int distinct_bad = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const int kx = static_cast<int>(i % 13) - 6, ky = static_cast<int>(i / 13) - 6;
    if (cands[i].offset.kx != kx || cands[i].offset.ky != ky) ++distinct_bad;
  }
  auto c = make_check("candidate_windows_15x15", "==", 169, static_cast<double>(cands.size()));
  c.passed = c.passed && distinct_bad == 0;
  c.details["offset_range"] = {-6, 6};
  c.details["misordered"] = distinct_bad;
  return c;
}

CheckResult check_integer_shift(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 1);
  double worst = 0;
  for (int inst = 0; inst < opt.shift_instances; ++inst) {
    const auto spec = desk_spec(1);
    const auto w = init_backbone_weights(spec, rng);
    const int j = 2 * std::uniform_int_distribution<int>(0, 3)(rng);
    const int side = 107 + 16 * j;
    const Image img = uniform_noise(side, rng);
    const FeatureMap big = backbone_forward(img, spec, w);
    std::uniform_int_distribution<int> pick(0, j);
    const int left = pick(rng), top = pick(rng);
    const FeatureMap direct = backbone_forward(sub_image(img, 16 * left, 16 * top, 107), spec, w);
    const GridOffset off{left - j / 2, top - j / 2, 0.0, 0.0};
    worst = std::max(worst, max_abs_diff(extract_window_at(big, top, left, 3), direct));
    worst = std::max(worst, max_abs_diff(sample(big, off, opt), direct));
  }
  auto c = make_check("integer_shift_max_abs_diff", "<=", 1e-4, worst);
  c.details["instances"] = opt.shift_instances;
  return c;
}

CheckResult check_fractional_fidelity(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 2);
  const auto spec = desk_spec(1);
  constexpr double kBlur = 2.0;
  constexpr int kPerImage = 5;
  std::vector<double> cos;
  for (int inst = 0; inst < opt.fidelity_instances; ++inst) {
    const auto w = init_backbone_weights(spec, rng);
    const Image img = blurred_noise(299, 299, rng(), kBlur, 128.0, 40.0);
    const FeatureMap map = backbone_forward(img, spec, w);
    // Displacements in whole pixels that are not multiples of the cell stride.
    std::uniform_int_distribution<int> pix(-5 * 16, 5 * 16);
    for (int k = 0; k < kPerImage; ++k) {
      int px, py;
      do {
        px = pix(rng);
        py = pix(rng);
      } while (px % 16 == 0 && py % 16 == 0);
      const double tx = px / 16.0, ty = py / 16.0;
      const GridOffset off{0, 0, tx, ty};
      const FeatureMap interp = sample(map, off, opt);
      const FeatureMap brute =
          backbone_forward(sub_image(img, 96 + px, 96 + py, 107), spec, w);
      cos.push_back(cosine(interp, brute));
    }
  }
  const double mean = std::accumulate(cos.begin(), cos.end(), 0.0) / cos.size();
  auto c = make_check("fractional_shift_mean_cosine", ">=", 0.95, mean);
  c.details["blur_sigma"] = kBlur;
  c.details["samples"] = cos.size();
  c.details["min"] = *std::min_element(cos.begin(), cos.end());
  c.details["p05"] = quantile(cos, 0.05);
  c.details["median"] = quantile(cos, 0.5);
  c.details["mean"] = mean;
  c.details["max"] = *std::max_element(cos.begin(), cos.end());
  return c;
}

CheckResult check_bilinear_linearity(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 3);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), frac(-2.0, 2.0);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const FeatureMap f = random_map(7, 7, 4, rng), g = random_map(7, 7, 4, rng);
    const double a = coef(rng), b = coef(rng);
    FeatureMap mix(7, 7, 4);
    for (std::size_t i = 0; i < mix.values.size(); ++i)
      mix.values[i] = static_cast<float>(a * f.values[i] + b * g.values[i]);
    const GridOffset off{0, 0, frac(rng), frac(rng)};
    const FeatureMap sm = sample(mix, off, opt), sf = sample(f, off, opt), sg = sample(g, off, opt);
    for (std::size_t i = 0; i < sm.values.size(); ++i)
      worst = std::max(worst, std::abs(sm.values[i] - (a * sf.values[i] + b * sg.values[i])));
  }
  return make_check("bilinear_linearity_max_abs_diff", "<=", 1e-5, worst);
}

namespace {

struct ScaleFixture {
  ScaledMapSet set;
  std::vector<GridOffset> offsets;
};

ScaleFixture scale_fixture(const VerifyOptions& opt, std::uint64_t salt) {
  Rng rng(opt.seed * 7919 + salt);
  const auto spec = desk_spec(1);
  const auto w = init_backbone_weights(spec, rng);
  const Image frame = blurred_noise(320, 240, rng(), 2.0, 128.0, 40.0);
  const Box target{140, 100, 40, 40};
  std::vector<ScaledMap> entries;
  for (double s : TrackerConfig{}.init_scales) {
    const auto t = roi_crop_transform(target, s, 139, frame.width, frame.height);
    entries.push_back({s, backbone_forward(crop_patch(frame, t), spec, w, t, s)});
  }
  std::uniform_real_distribution<double> off(-0.9, 0.9);
  ScaleFixture fx{ScaledMapSet(entries), {}};
  for (std::size_t i = 0; i < entries.size(); ++i) fx.offsets.push_back({0, 0, off(rng), off(rng)});
  return fx;
}

}  // namespace

CheckResult check_scale_endpoints(const VerifyOptions& opt) {
  double worst = 0;
  ordered_json scales = ordered_json::array();
  for (int rep = 0; rep < 10; ++rep) {
    const auto fx = scale_fixture(opt, 100 + rep);
    const auto& e = fx.set.entries();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const FeatureMap got = interp_scale(fx.set, e[i].scale, fx.offsets, 3);
      worst = std::max(worst, max_abs_diff(got, sample(e[i].map, fx.offsets[i], opt)));
      if (rep == 0) scales.push_back(e[i].scale);
    }
  }
  const std::vector<double> want = {1.0 / 1.2, 1.0, 1.2};
  bool honored = scales.size() == want.size();
  for (std::size_t i = 0; honored && i < want.size(); ++i)
    honored = std::abs(scales[i].get<double>() - want[i]) < 1e-12;
  auto c = make_check("scale_endpoint_max_abs_diff", "<=", 1e-6, worst);
  c.passed = c.passed && honored;
  c.details["scales"] = scales;
  c.details["scale_set_matches"] = honored;
  return c;
}

CheckResult check_scale_midpoint(const VerifyOptions& opt) {
  double worst = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto fx = scale_fixture(opt, 200 + rep);
    const auto& e = fx.set.entries();
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      const double mid = 0.5 * (e[i].scale + e[i + 1].scale);
      const FeatureMap got = interp_scale(fx.set, mid, fx.offsets, 3);
      const FeatureMap lo = sample(e[i].map, fx.offsets[i], opt);
      const FeatureMap hi = sample(e[i + 1].map, fx.offsets[i + 1], opt);
      for (std::size_t k = 0; k < got.values.size(); ++k)
        worst = std::max(worst, std::abs(got.values[k] - 0.5 * (lo.values[k] + hi.values[k])));
    }
  }
  return make_check("scale_midpoint_max_abs_diff", "<=", 1e-6, worst);
}

CheckResult check_flop_ratio() {
  double lowest = std::numeric_limits<double>::infinity();
  ordered_json per = ordered_json::object();
  for (const auto& [name, spec] : {std::pair{"desk", desk_spec(1)}, {"vggm-geometry", vggm_geometry_spec(3)}}) {
    const double r = 169.0 * count_flops(spec, 107).conv_macs / count_flops(spec, 299).conv_macs;
    per[name] = r;
    lowest = std::min(lowest, r);
  }
  auto c = make_check("candidate_flop_ratio_min", ">=", 10.0, lowest);
  c.details["ratios"] = per;
  return c;
}

CheckResult check_gradients(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 4);
  double worst = 0;
  int compared = 0;
  const std::vector<int> hidden = {6, 5};
  for (int outputs : {kObjectClasses, kLocClassCount}) {
    for (int rep = 0; rep < 3; ++rep) {
      HeadParams head = make_head(12, hidden, outputs, rng);
      // Larger final-layer weights make the gradients of every layer well above noise.
      std::normal_distribution<float> n(0.0f, 0.5f);
      for (auto& v : head.layers.back().weights) v = n(rng);
      for (auto& l : head.layers)
        for (auto& b : l.bias) b = n(rng);
      std::vector<std::vector<float>> feats(8, std::vector<float>(12));
      std::vector<int> labels(8);
      std::uniform_int_distribution<int> cls(0, outputs - 1);
      for (auto& f : feats)
        for (auto& v : f) v = n(rng) * 2.0f;
      for (auto& l : labels) l = cls(rng);
      std::vector<FeatureView> batch(feats.begin(), feats.end());
      HeadGradient g;
      head_loss_and_gradient(head, batch, labels, &g);
      auto check = [&](float& p, double analytic) {
        const float orig = p;
        const float h = 1e-3f * std::max(1.0f, std::abs(orig));
        p = orig + h;
        const double up = head_loss_and_gradient(head, batch, labels, nullptr);
        const float pu = p;
        p = orig - h;
        const double down = head_loss_and_gradient(head, batch, labels, nullptr);
        const float pd = p;
        p = orig;
        const double numeric = (up - down) / (static_cast<double>(pu) - pd);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
        ++compared;
      };
      for (std::size_t l = 0; l < head.layers.size(); ++l) {
        for (std::size_t i = 0; i < head.layers[l].weights.size(); ++i)
          check(head.layers[l].weights[i], g.weights[l][i]);
        for (std::size_t i = 0; i < head.layers[l].bias.size(); ++i)
          check(head.layers[l].bias[i], g.bias[l][i]);
      }
    }
  }
  auto c = make_check("head_gradient_max_rel_error", "<=", 1e-3, worst);
  c.details["parameters_checked"] = compared;
  return c;
}

CheckResult check_softmax(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 5);
  std::uniform_real_distribution<double> z(-30.0, 30.0), shift(-100.0, 100.0);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> logits(t % 2 ? 5 : 2);
    for (auto& v : logits) v = z(rng);
    const auto p = softmax(logits);
    worst = std::max(worst, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    const double c = shift(rng);
    auto shifted = logits;
    for (auto& v : shifted) v += c;
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
  }
  return make_check("softmax_sum_and_shift_max_dev", "<=", 1e-9, worst);
}

CheckResult check_update_schedule() {
  const TrackerConfig cfg;
  int mismatches = 0;
  ordered_json long_frames = ordered_json::array(), short_frames = ordered_json::array();
  for (int f = 0; f <= 100; ++f) {
    // Stub scores: every seventh frame falls below the threshold.
    const double score = f % 7 == 3 ? 0.2 : 0.9;
    const auto d = update_decision(f, score, cfg);
    const bool want_long = f > 0 && f % 10 == 0;
    const bool want_short = f % 7 == 3;
    if (d.long_term != want_long || d.short_term != want_short) ++mismatches;
    if (d.long_term) long_frames.push_back(f);
    if (d.short_term) short_frames.push_back(f);
  }
  auto c = make_check("update_schedule_mismatches", "==", 0, mismatches);
  c.details["long_term_frames"] = long_frames;
  c.details["short_term_frames"] = short_frames;
  return c;
}

CheckResult check_hard_mining(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 6);
  std::uniform_int_distribution<int> level(0, 400);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> prob(1024);
    // Coarse levels force ties.
    for (auto& p : prob) p = level(rng) / 400.0;
    auto got = select_hard_negatives(prob, 96);
    std::vector<std::size_t> idx(prob.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return prob[a] != prob[b] ? prob[a] > prob[b] : a < b;
    });
    idx.resize(96);
    std::sort(idx.begin(), idx.end());
    std::sort(got.begin(), got.end());
    if (got != idx) ++mismatches;
  }
  auto c = make_check("hard_mining_top96_mismatches", "==", 0, mismatches);
  c.details["pools"] = 50;
  return c;
}

CheckResult check_ope_oracle(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 7);
  std::uniform_int_distribution<int> len(1, 80), pos(0, 300), size(5, 80), jit(-40, 40);
  int mismatches = 0;
  for (int t = 0; t < opt.ope_trajectories; ++t) {
    const int n = len(rng);
    std::vector<Box> gt, est;
    for (int i = 0; i < n; ++i) {
      const Box g{static_cast<double>(pos(rng)), static_cast<double>(pos(rng)),
                  static_cast<double>(size(rng)), static_cast<double>(size(rng))};
      gt.push_back(g);
      est.push_back(Box{g.x + jit(rng), g.y + jit(rng), std::max(1.0, g.w + jit(rng) / 2),
                        std::max(1.0, g.h + jit(rng) / 2)});
    }
    if (!(ope_evaluate(est, gt) == ope_reference(est, gt))) ++mismatches;
  }
  // Hand-computed cases.
  int hand_failures = 0;
  const std::vector<Box> g(10, Box{50, 50, 40, 40});
  {
    const auto r = ope_evaluate(g, g);
    if (r.precision_20 != 1.0 || r.auc != 1.0) ++hand_failures;
  }
  {
    std::vector<Box> e(10, Box{75, 50, 40, 40});
    if (ope_evaluate(e, g).precision_20 != 0.0) ++hand_failures;
  }
  {
    // Same-size boxes overlapping by a third of the width have IoU 0.5.
    const std::vector<Box> gt2(10, Box{0, 0, 30, 30});
    const std::vector<Box> e2(10, Box{10, 0, 30, 30});
    const auto r = ope_evaluate(e2, gt2);
    if (std::abs(r.auc - 10.0 / 21.0) > 1e-15) ++hand_failures;
  }
  auto c = make_check("ope_oracle_mismatches", "==", 0, mismatches + hand_failures);
  c.details["trajectories"] = opt.ope_trajectories;
  c.details["hand_case_failures"] = hand_failures;
  return c;
}

CheckResult check_weight_roundtrip(const VerifyOptions& opt) {
  Rng rng(opt.seed * 7919 + 8);
  const NetworkModel m = make_model(desk_spec(1), desk_hidden(), rng);
  const auto bytes = save_weights(m);
  const NetworkModel back = load_weights(bytes, m);
  int failures = save_weights(back) == bytes ? 0 : 1;
  try {
    load_weights(std::span(bytes).first(bytes.size() - 7), m);
    ++failures;
  } catch (const FormatError&) {
  }
  auto c = make_check("weight_roundtrip_failures", "==", 0, failures);
  c.details["bytes"] = bytes.size();
  return c;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  return {check_geometry_sizes(),        check_candidate_count(),
          check_integer_shift(opt),      check_fractional_fidelity(opt),
          check_bilinear_linearity(opt), check_scale_endpoints(opt),
          check_scale_midpoint(opt),     check_flop_ratio(),
          check_gradients(opt),          check_softmax(opt),
          check_update_schedule(),       check_hard_mining(opt),
          check_ope_oracle(opt),         check_weight_roundtrip(opt)};
}

std::string verify_json(const std::vector<CheckResult>& checks) {
  ordered_json j;
  bool ok = true;
  ordered_json list = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["comparison"] = c.comparison;
    e["tolerance"] = c.tolerance;
    e["observed"] = c.observed;
    e["details"] = c.details;
    list.push_back(e);
    ok = ok && c.passed;
  }
  j["passed"] = ok;
  j["checks"] = list;
  return j.dump(2) + "\n";
}

}  // namespace ilnet
