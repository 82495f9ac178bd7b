#include <algorithm>
#include <chrono>

#include "ilnet/backbone.hpp"
#include "ilnet/commands.hpp"
#include "ilnet/error.hpp"

namespace ilnet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Keeps the optimizer from discarding scores.
volatile double g_sink = 0.0;

}  // namespace

TimingStats timing_stats(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw InputError("no timing samples");
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t n = samples_ms.size();
  TimingStats s;
  s.median_ms = n % 2 ? samples_ms[n / 2] : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  s.min_ms = samples_ms.front();
  s.max_ms = samples_ms.back();
  return s;
}

BenchReport run_bench(const RunConfig& config, int reps) {
  if (reps < 3) throw ConfigError("benchmark needs at least 3 repetitions");
  const NetworkModel model = build_model(config);
  const ModelScorer scorer(model);
  const auto& tc = config.tracker;

  SynthSpec spec;
  const Sequence seq = synth_sequence(spec);
  const Image frame = convert_channels(seq.frames.front(), model.spec.input_channels);
  const Box target = seq.truth.front();
  const int W = frame.width, H = frame.height;
  const double step = tc.fine_scale_step;

  // Fixed fine-sample boxes around the target, shared by both paths.
  Rng rng(config.seed);
  const double pitch = kCellStride / kObjectPixels;
  std::normal_distribution<double> draw(1.0, tc.fine_scale_sigma);
  std::vector<Box> fine_boxes;
  for (double dy : tc.fine_lattice)
    for (double dx : tc.fine_lattice)
      for (int d = 0; d < tc.fine_scale_draws; ++d) {
        const double r = std::clamp(draw(rng), 1.0 / step, step);
        fine_boxes.push_back(Box::from_center(target.cx() + dx * pitch * target.w,
                                              target.cy() + dy * pitch * target.h, r * target.w,
                                              r * target.h));
      }

  BenchReport rep;
  rep.backbone = config.backbone;
  rep.reps = reps;
  rep.fine_samples = static_cast<int>(fine_boxes.size());
  rep.macs_107 = count_flops(model.spec, 107).conv_macs;
  rep.macs_139 = count_flops(model.spec, 139).conv_macs;
  rep.macs_299 = count_flops(model.spec, 299).conv_macs;

  auto forward = [&](const CropTransform& t, double scale) {
    return backbone_forward(crop_patch(frame, t), model.spec, model.conv, t, scale);
  };

  std::vector<double> ic, bc, ifn, bf;
  for (int r = 0; r < reps; ++r) {
    // Interpolated candidates: one ROI forward, every window scored from the shared map.
    auto t0 = Clock::now();
    const auto roi = roi_crop_transform(target, 1.0, 299, W, H, tc.pad_value);
    const FeatureMap roi_map = forward(roi, 1.0);
    const auto cands = candidate_grid(roi_map);
    double acc = 0;
    for (const auto& c : cands) acc += scorer.object_score(c.window);
    ic.push_back(ms_since(t0));
    rep.candidates = static_cast<int>(cands.size());

    // Brute force: crop and forward each candidate box separately.
    t0 = Clock::now();
    for (const auto& c : cands) {
      const Box b = grid_to_box(c.offset.kx, c.offset.ky, 0.0, 0.0, roi, 1.0);
      acc += scorer.object_score(forward(roi_crop_transform(b, 1.0, 107, W, H, tc.pad_value), 1.0));
    }
    bc.push_back(ms_since(t0));

    // Interpolated fine stage: two extra scale forwards plus the ROI map.
    t0 = Clock::now();
    const ScaledMapSet maps({
        ScaledMap{1.0 / step, forward(roi_crop_transform(target, 1.0 / step, 139, W, H,
                                                         tc.pad_value), 1.0 / step)},
        ScaledMap{1.0, roi_map},
        ScaledMap{step, forward(roi_crop_transform(target, step, 139, W, H, tc.pad_value), step)},
    });
    for (const Box& b : fine_boxes)
      if (auto f = interpolate_box(maps, b, target.w)) acc += scorer.object_score(*f);
    ifn.push_back(ms_since(t0));

    t0 = Clock::now();
    for (const Box& b : fine_boxes)
      acc += scorer.object_score(forward(roi_crop_transform(b, 1.0, 107, W, H, tc.pad_value), 1.0));
    bf.push_back(ms_since(t0));
    g_sink = g_sink + acc;
  }

  std::vector<double> iframe(reps), bframe(reps);
  for (int r = 0; r < reps; ++r) {
    iframe[r] = ic[r] + ifn[r];
    bframe[r] = bc[r] + bf[r];
  }
  rep.interp_candidate = timing_stats(ic);
  rep.brute_candidate = timing_stats(bc);
  rep.interp_fine = timing_stats(ifn);
  rep.brute_fine = timing_stats(bf);
  rep.interp_frame = timing_stats(iframe);
  rep.brute_frame = timing_stats(bframe);
  rep.candidate_flop_ratio =
      static_cast<double>(rep.candidates) * rep.macs_107 / static_cast<double>(rep.macs_299);
  rep.frame_flop_ratio = static_cast<double>(rep.candidates + rep.fine_samples) * rep.macs_107 /
                         static_cast<double>(rep.macs_299 + 2 * rep.macs_139);
  rep.candidate_speedup = rep.brute_candidate.median_ms / rep.interp_candidate.median_ms;
  rep.frame_speedup = rep.brute_frame.median_ms / rep.interp_frame.median_ms;
  return rep;
}

nlohmann::ordered_json bench_json(const BenchReport& r) {
  auto stats = [](const TimingStats& s) {
    nlohmann::ordered_json j;
    j["median_ms"] = s.median_ms;
    j["min_ms"] = s.min_ms;
    j["max_ms"] = s.max_ms;
    return j;
  };
  nlohmann::ordered_json j;
  j["backbone"] = r.backbone;
  j["reps"] = r.reps;
  j["candidates"] = r.candidates;
  j["fine_samples"] = r.fine_samples;
  j["flops"] = {{"conv_macs_107", r.macs_107},
                {"conv_macs_139", r.macs_139},
                {"conv_macs_299", r.macs_299},
                {"candidate_ratio", r.candidate_flop_ratio},
                {"frame_ratio", r.frame_flop_ratio}};
  j["wall_clock"] = {{"interpolated_candidate", stats(r.interp_candidate)},
                     {"brute_force_candidate", stats(r.brute_candidate)},
                     {"interpolated_fine", stats(r.interp_fine)},
                     {"brute_force_fine", stats(r.brute_fine)},
                     {"interpolated_frame", stats(r.interp_frame)},
                     {"brute_force_frame", stats(r.brute_frame)}};
  j["speedup"] = {{"candidate", r.candidate_speedup}, {"frame", r.frame_speedup}};
  j["reference_speedup"] = {{"candidate", 9.4}, {"frame", 8.8}};
  return j;
}

}  // namespace ilnet
