#include "ilnet/tracker.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ilnet/error.hpp"

namespace ilnet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Unit direction of the object inside the patch for each localization class.
std::array<double, 2> class_direction(LocClass c) {
  switch (c) {
    case LocClass::up: return {0.0, -1.0};
    case LocClass::down: return {0.0, 1.0};
    case LocClass::left: return {-1.0, 0.0};
    case LocClass::right: return {1.0, 0.0};
    case LocClass::middle: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("tracker config: ") + what);
}

std::vector<FeatureView> views(const std::vector<const SampleRecord*>& recs) {
  std::vector<FeatureView> out;
  out.reserve(recs.size());
  for (const auto* r : recs) out.emplace_back(r->features);
  return out;
}

}  // namespace

void TrackerConfig::validate() const {
  require(score_threshold > 0 && score_threshold < 1, "score threshold must be in (0,1)");
  require(pos_iou > 0 && pos_iou < 1 && neg_iou > 0 && neg_iou < 1,
          "IoU thresholds must be in (0,1)");
  require(!init_scales.empty(), "need at least one initial scale");
  for (std::size_t i = 1; i < init_scales.size(); ++i)
    require(init_scales[i] > init_scales[i - 1], "initial scales must increase");
  require(fine_scale_step > 1, "fine scale step must exceed 1");
  require(long_term_interval >= 1, "long-term interval must be >= 1");
  require(frame_pos >= 1 && frame_loc >= kLocClassCount && frame_neg >= 1,
          "per-frame sample counts too small");
  require(init_pos >= 1 && init_loc >= kLocClassCount && init_neg >= 1,
          "initial sample counts too small");
  require(init_far_fraction >= 0 && init_far_fraction <= 1, "far fraction must be in [0,1]");
  require(init_iterations >= 1 && online_iterations >= 1, "iteration counts must be >= 1");
  require(object_batch >= 2 && loc_batch >= kLocClassCount, "minibatch sizes too small");
  require(mining_keep >= 1 && mining_keep < object_batch && mining_pool >= mining_keep,
          "mining sizes inconsistent with the object minibatch");
  require(lr_hidden >= 0 && lr_final >= 0, "learning rates must be >= 0");
  require(!fine_lattice.empty() && fine_scale_draws >= 1 && fine_top >= 1,
          "fine search needs lattice points and draws");
  require(fine_lattice.size() * fine_lattice.size() * fine_scale_draws == 100,
          "fine lattice x scale draws must give 100 samples");
  require(long_window >= 1 && short_window >= 1 && neg_window >= 1, "store windows must be >= 1");
}

SgdConfig TrackerConfig::sgd(int iterations) const {
  SgdConfig c;
  c.lr_hidden = lr_hidden;
  c.lr_final = lr_final;
  c.momentum = momentum;
  c.weight_decay = weight_decay;
  c.object_batch = object_batch;
  c.loc_batch = loc_batch;
  c.iterations = iterations;
  return c;
}

double ModelScorer::object_score(const FeatureMap& window) const {
  return object_probability(model_.object_head, FeatureView(window.values));
}

LocClass ModelScorer::locate(const FeatureMap& window) const {
  const auto z = head_forward(model_.loc_head, FeatureView(window.values));
  return static_cast<LocClass>(std::max_element(z.begin(), z.end()) - z.begin());
}

// ---------------------------------------------------------------- sample banks

void SampleBank::add(int frame, int label, std::vector<float> features) {
  if (!records_.empty() && frame < records_.back().frame)
    throw InputError("sample bank frame tags must be non-decreasing");
  records_.push_back(SampleRecord{frame, label, std::move(features)});
}

int SampleBank::frame_count() const {
  int n = 0;
  int last = std::numeric_limits<int>::min();
  for (const auto& r : records_)
    if (r.frame != last) {
      ++n;
      last = r.frame;
    }
  return n;
}

namespace {

// Index of the first record belonging to the newest `frames` distinct tags.
std::size_t newest_start(const std::deque<SampleRecord>& recs, int frames) {
  int seen = 0;
  int last = std::numeric_limits<int>::min();
  std::size_t i = recs.size();
  while (i > 0) {
    const int f = recs[i - 1].frame;
    if (f != last) {
      if (seen == frames) break;
      ++seen;
      last = f;
    }
    --i;
  }
  return i;
}

}  // namespace

void SampleBank::evict() {
  const std::size_t start = newest_start(records_, window_);
  records_.erase(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(start));
}

std::vector<const SampleRecord*> SampleBank::newest(int frames) const {
  std::vector<const SampleRecord*> out;
  for (std::size_t i = newest_start(records_, frames); i < records_.size(); ++i)
    out.push_back(&records_[i]);
  return out;
}

// ---------------------------------------------------------------- coarse stage

std::size_t select_by_overlap(std::span<const MovedCandidate> moved) {
  if (moved.empty()) throw InputError("no candidates to select from");
  std::vector<std::size_t> order(moved.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return moved[a].grid_index < moved[b].grid_index;
  });
  std::size_t best = order.front();
  double best_sum = -1.0;
  for (std::size_t i : order) {
    double sum = 0.0;
    for (std::size_t j : order)
      if (j != i) sum += iou(moved[i].box, moved[j].box);
    const auto& c = moved[i];
    const auto& b = moved[best];
    const bool better =
        sum > best_sum ||
        (sum == best_sum && (c.score > b.score ||
                             (c.score == b.score && c.grid_index < b.grid_index)));
    if (better) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

CoarseResult coarse_localize(const Scorer& scorer, const FeatureMap& roi_map,
                             const CropTransform& roi, const TrackerConfig& config) {
  CoarseResult result;
  const auto cands = candidate_grid(roi_map, 3);
  std::vector<MovedCandidate> moved;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& c = cands[i];
    const double p = scorer.object_score(c.window);
    result.best_score = std::max(result.best_score, p);
    if (!(p > config.score_threshold)) continue;
    Box b = grid_to_box(c.offset.kx, c.offset.ky, 0.0, 0.0, roi, roi.scale);
    const auto dir = class_direction(scorer.locate(c.window));
    b.x += dir[0] * config.coarse_move_step * b.w;
    b.y += dir[1] * config.coarse_move_step * b.h;
    moved.push_back(MovedCandidate{b, p, static_cast<int>(i)});
  }
  result.survivors = static_cast<int>(moved.size());
  if (!moved.empty()) result.box = moved[select_by_overlap(moved)].box;
  return result;
}

// ---------------------------------------------------------------- fine stage

std::optional<FeatureMap> interpolate_box(const ScaledMapSet& maps, const Box& box,
                                          double base_w) {
  const double s = box.w / base_w;
  std::vector<GridOffset> offsets;
  offsets.reserve(maps.size());
  for (const auto& e : maps.entries()) {
    if (!e.map.transform) return std::nullopt;
    const auto [ox, oy] = image_offset_cells(e.map, box.cx(), box.cy());
    offsets.push_back(split_offset(ox, oy));
  }
  if (!interp_reachable(maps, s, offsets, 3)) return std::nullopt;
  return interp_scale(maps, s, offsets, 3);
}

FineResult fine_search(const Scorer& scorer, const ScaledMapSet& maps, const Box& coarse,
                       double current_scale, double base_w, double base_h,
                       const TrackerConfig& config, Rng& rng) {
  const double pitch = kCellStride / kObjectPixels * current_scale;
  const double lo = 1.0 / config.fine_scale_step;
  const double hi = config.fine_scale_step;
  std::normal_distribution<double> scale_draw(1.0, config.fine_scale_sigma);
  FineResult result;
  for (double dy : config.fine_lattice)
    for (double dx : config.fine_lattice)
      for (int d = 0; d < config.fine_scale_draws; ++d) {
        const double r = std::clamp(scale_draw(rng), lo, hi);
        FineSample fs;
        fs.scale = current_scale * r;
        fs.box = Box::from_center(coarse.cx() + dx * pitch * base_w,
                                  coarse.cy() + dy * pitch * base_h, fs.scale * base_w,
                                  fs.scale * base_h);
        const auto feat = interpolate_box(maps, fs.box, base_w);
        fs.score = feat ? scorer.object_score(*feat) : -std::numeric_limits<double>::infinity();
        result.samples.push_back(fs);
      }
  std::vector<std::size_t> order(result.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.samples[a].score > result.samples[b].score;
  });
  const std::size_t k = std::min<std::size_t>(config.fine_top, order.size());
  double cx = 0, cy = 0, w = 0, h = 0, s = 0, score = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& fs = result.samples[order[i]];
    cx += fs.box.cx();
    cy += fs.box.cy();
    w += fs.box.w;
    h += fs.box.h;
    s += fs.scale;
    score += fs.score;
  }
  result.box = Box::from_center(cx / k, cy / k, w / k, h / k);
  result.scale = s / k;
  result.score = score / k;
  return result;
}

UpdateDecision update_decision(int frame_index, double score, const TrackerConfig& config) {
  UpdateDecision d;
  d.long_term = frame_index > 0 && frame_index % config.long_term_interval == 0;
  d.short_term = score < config.score_threshold;
  return d;
}

// ---------------------------------------------------------------- tracker

Image Tracker::prepare(const Image& frame) const {
  return convert_channels(frame, model_.spec.input_channels);
}

FeatureMap Tracker::forward_crop(const Image& frame, const CropTransform& t) {
  ++forwards_;
  return backbone_forward(crop_patch(frame, t), model_.spec, model_.conv, t, t.scale);
}

Tracker::Tracker(const Image& first_frame, const Box& init_box, NetworkModel model,
                 TrackerConfig config)
    : model_(std::move(model)), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  if (!init_box.valid()) throw InputError("initial box is degenerate");
  if (first_frame.empty()) throw InputError("empty first frame");
  frame_w_ = first_frame.width;
  frame_h_ = first_frame.height;
  // Clip to the frame.
  const double x0 = std::max(0.0, init_box.x), y0 = std::max(0.0, init_box.y);
  const double x1 = std::min<double>(frame_w_, init_box.x + init_box.w);
  const double y1 = std::min<double>(frame_h_, init_box.y + init_box.h);
  box_ = Box{x0, y0, x1 - x0, y1 - y0};
  if (!box_.valid()) throw InputError("initial box lies outside the frame");
  base_w_ = box_.w;
  base_h_ = box_.h;
  scale_ = 1.0;
  store_.positives = SampleBank(config_.long_window);
  store_.localization = SampleBank(config_.long_window);
  store_.negatives = SampleBank(config_.neg_window);

  const Image img = prepare(first_frame);
  const Box& target = box_;
  forwards_ = 0;

  std::vector<ScaledMap> init_entries;
  for (double s : config_.init_scales)
    init_entries.push_back(ScaledMap{
        s, forward_crop(img, roi_crop_transform(target, s, 139, frame_w_, frame_h_,
                                                config_.pad_value))});
  const ScaledMapSet init_set(init_entries);
  const FeatureMap roi_map = forward_crop(
      img, roi_crop_transform(target, 1.0, 299, frame_w_, frame_h_, config_.pad_value));

  // Close negatives read the scale-1 slot from the full ROI map.
  std::vector<ScaledMap> close_entries = init_entries;
  bool have_unit = false;
  for (auto& e : close_entries)
    if (std::abs(e.scale - 1.0) < 1e-12) {
      e.map = roi_map;
      have_unit = true;
    }
  if (!have_unit) {
    close_entries.push_back(ScaledMap{1.0, roi_map});
    std::sort(close_entries.begin(), close_entries.end(),
              [](const ScaledMap& a, const ScaledMap& b) { return a.scale < b.scale; });
  }
  const ScaledMapSet close_set(close_entries);

  auto reachable = [&](const ScaledMapSet& set) {
    return [&set, this](const Box& b) { return interpolate_box(set, b, base_w_).has_value(); };
  };
  auto reach_init = reachable(init_set);
  auto reach_close = reachable(close_set);

  auto& rep = init_report_;
  const auto pos_boxes = sample_gaussian_boxes(
      rng_, target, config_.pos_trans_sigma, config_.pos_scale_sigma, config_.init_pos,
      {"object: IoU > pos_iou, interpolable", [&](const Box& b) {
         return iou(b, target) > config_.pos_iou && reach_init(b);
       }});
  for (const auto& b : pos_boxes) rep.positive_features.push_back(interpolate_box(init_set, b, base_w_)->values);

  const int per_class = config_.init_loc / kLocClassCount;
  for (int c = 0; c < kLocClassCount; ++c) {
    const auto cls = static_cast<LocClass>(c);
    const auto dir = class_direction(cls);
    const Box mean = Box::from_center(target.cx() - dir[0] * config_.loc_offset * target.w,
                                      target.cy() - dir[1] * config_.loc_offset * target.h,
                                      target.w, target.h);
    const auto boxes = sample_gaussian_boxes(
        rng_, mean, config_.loc_trans_sigma, config_.loc_scale_sigma, per_class,
        {std::string("localization '") + std::string(to_string(cls)) + "'", [&](const Box& b) {
           return iou(b, target) > config_.pos_iou && localization_label(b, target) == cls &&
                  reach_init(b);
         }});
    for (const auto& b : boxes) {
      rep.loc_features.push_back(interpolate_box(init_set, b, base_w_)->values);
      rep.loc_labels.push_back(c);
    }
  }

  const int n_far = static_cast<int>(std::lround(config_.init_neg * config_.init_far_fraction));
  const int n_close = config_.init_neg - n_far;
  const auto close_boxes = sample_gaussian_boxes(
      rng_, target, config_.neg_trans_sigma, 0.0, n_close,
      {"close background: IoU < neg_iou, interpolable", [&](const Box& b) {
         return iou(b, target) < config_.neg_iou && reach_close(b);
       }});
  for (const auto& b : close_boxes) rep.negative_features.push_back(interpolate_box(close_set, b, base_w_)->values);
  rep.close_negatives = static_cast<int>(close_boxes.size());
  const auto far_boxes = sample_uniform_boxes(
      rng_, target, frame_w_, frame_h_, config_.far_scale_sigma, n_far,
      {"far background: IoU < neg_iou", [&](const Box& b) {
         return iou(b, target) < config_.neg_iou;
       }});
  for (const auto& b : far_boxes) {
    if (auto f = interpolate_box(close_set, b, base_w_)) {
      rep.negative_features.push_back(std::move(f->values));
      ++rep.close_negatives;
      continue;
    }
    const Box unit = Box::from_center(b.cx(), b.cy(), base_w_, base_h_);
    const auto t =
        roi_crop_transform(unit, b.w / base_w_, 107, frame_w_, frame_h_, config_.pad_value);
    rep.negative_features.push_back(forward_crop(img, t).values);
    ++rep.far_negatives;
  }
  rep.backbone_forwards = forwards_;

  // Initial training.
  std::vector<FeatureView> pos, neg, loc;
  for (const auto& f : rep.positive_features) pos.emplace_back(f);
  for (const auto& f : rep.negative_features) neg.emplace_back(f);
  for (const auto& f : rep.loc_features) loc.emplace_back(f);
  const auto sgd = config_.sgd(config_.init_iterations);
  rep.object_loss = train_object_head(model_.object_head, object_momentum_, pos, neg, sgd, rng_,
                                      config_.miner());
  rep.loc_loss =
      train_localization_head(model_.loc_head, loc_momentum_, loc, rep.loc_labels, sgd, rng_);

  // Seed the online banks with one frame's worth of the initial samples.
  for (int i = 0; i < config_.frame_pos && i < static_cast<int>(pos_boxes.size()); ++i)
    store_.positives.add(0, 1, rep.positive_features[i]);
  const int loc_per_class = config_.frame_loc / kLocClassCount;
  for (int c = 0; c < kLocClassCount; ++c)
    for (int i = 0; i < loc_per_class && i < per_class; ++i) {
      const std::size_t idx = static_cast<std::size_t>(c) * per_class + i;
      if (idx < rep.loc_features.size())
        store_.localization.add(0, rep.loc_labels[idx], rep.loc_features[idx]);
    }
  std::vector<std::size_t> neg_order(rep.negative_features.size());
  std::iota(neg_order.begin(), neg_order.end(), std::size_t{0});
  std::shuffle(neg_order.begin(), neg_order.end(), rng_);
  for (int i = 0; i < config_.frame_neg && i < static_cast<int>(neg_order.size()); ++i)
    store_.negatives.add(0, 0, rep.negative_features[neg_order[i]]);
}

bool Tracker::collect_samples(const ScaledMapSet& maps, const Box& estimated, double score,
                              std::vector<std::string>* warnings) {
  if (!(score > config_.score_threshold)) return false;
  auto reach = [&](const Box& b) { return interpolate_box(maps, b, base_w_).has_value(); };
  std::vector<std::vector<float>> pos, loc, neg;
  std::vector<int> loc_labels;
  try {
    for (const auto& b : sample_gaussian_boxes(
             rng_, estimated, config_.pos_trans_sigma, config_.pos_scale_sigma, config_.frame_pos,
             {"online object: IoU > pos_iou, interpolable", [&](const Box& b) {
                return iou(b, estimated) > config_.pos_iou && reach(b);
              }}))
      pos.push_back(interpolate_box(maps, b, base_w_)->values);
    const int per_class = config_.frame_loc / kLocClassCount;
    for (int c = 0; c < kLocClassCount; ++c) {
      const auto cls = static_cast<LocClass>(c);
      const auto dir = class_direction(cls);
      const Box mean =
          Box::from_center(estimated.cx() - dir[0] * config_.loc_offset * estimated.w,
                           estimated.cy() - dir[1] * config_.loc_offset * estimated.h,
                           estimated.w, estimated.h);
      for (const auto& b : sample_gaussian_boxes(
               rng_, mean, config_.loc_trans_sigma, config_.loc_scale_sigma, per_class,
               {std::string("online localization '") + std::string(to_string(cls)) + "'",
                [&](const Box& b) {
                  return iou(b, estimated) > config_.pos_iou &&
                         localization_label(b, estimated) == cls && reach(b);
                }})) {
        loc.push_back(interpolate_box(maps, b, base_w_)->values);
        loc_labels.push_back(c);
      }
    }
    // Background at the ROI map's scale (scale_ until track() commits) so it stays
    // reachable far from the target.
    const Box neg_mean = Box::from_center(estimated.cx(), estimated.cy(), scale_ * base_w_,
                                          scale_ * base_h_);
    for (const auto& b : sample_gaussian_boxes(
             rng_, neg_mean, config_.neg_trans_sigma, 0.0, config_.frame_neg,
             {"online background: IoU < neg_iou, interpolable", [&](const Box& b) {
                return iou(b, estimated) < config_.neg_iou && reach(b);
              }}))
      neg.push_back(interpolate_box(maps, b, base_w_)->values);
  } catch (const SamplingError& e) {
    if (warnings) warnings->push_back(std::string("sample collection skipped: ") + e.what());
    return false;
  }
  for (auto& f : pos) store_.positives.add(frame_index_, 1, std::move(f));
  for (std::size_t i = 0; i < loc.size(); ++i)
    store_.localization.add(frame_index_, loc_labels[i], std::move(loc[i]));
  for (auto& f : neg) store_.negatives.add(frame_index_, 0, std::move(f));
  store_.positives.evict();
  store_.localization.evict();
  store_.negatives.evict();
  return true;
}

void Tracker::train(int pos_frames, int loc_frames, int iterations) {
  const auto pos = views(store_.positives.newest(pos_frames));
  const auto neg = views(store_.negatives.newest(config_.neg_window));
  const auto sgd = config_.sgd(iterations);
  train_object_head(model_.object_head, object_momentum_, pos, neg, sgd, rng_, config_.miner());
  const auto loc_recs = store_.localization.newest(loc_frames);
  const auto loc = views(loc_recs);
  std::vector<int> labels;
  for (const auto* r : loc_recs) labels.push_back(r->label);
  train_localization_head(model_.loc_head, loc_momentum_, loc, labels, sgd, rng_);
}

UpdateDecision Tracker::maybe_update(int frame_index, double score,
                                     std::vector<std::string>* warnings) {
  const UpdateDecision d = update_decision(frame_index, score, config_);
  auto run = [&](const char* kind, int pos_frames) {
    try {
      train(pos_frames, pos_frames, config_.online_iterations);
    } catch (const TrainingError& e) {
      if (warnings) warnings->push_back(std::string(kind) + " update skipped: " + e.what());
    }
  };
  if (d.short_term) run("short-term", config_.short_window);
  if (d.long_term) run("long-term", config_.long_window);
  return d;
}

TrackResult Tracker::track(const Image& frame) {
  const auto t_start = Clock::now();
  if (frame.width != frame_w_ || frame.height != frame_h_)
    throw InputError("frame size differs from the first frame");
  TrackResult result;
  auto& diag = result.diagnostics;
  ++frame_index_;
  diag.frame_index = frame_index_;
  forwards_ = 0;
  const Image img = prepare(frame);
  ModelScorer scorer(model_);

  auto t0 = Clock::now();
  const Box unit = Box::from_center(box_.cx(), box_.cy(), base_w_, base_h_);
  const auto roi = roi_crop_transform(unit, scale_, 299, frame_w_, frame_h_, config_.pad_value);
  const FeatureMap roi_map = forward_crop(img, roi);
  diag.timings.roi_forward_ms = ms_since(t0);

  t0 = Clock::now();
  const CoarseResult coarse = coarse_localize(scorer, roi_map, roi, config_);
  diag.timings.coarse_ms = ms_since(t0);
  diag.survivors = coarse.survivors;

  Box estimate = box_;
  double new_scale = scale_;
  double score = coarse.best_score;
  if (coarse.box) {
    diag.detected = true;
    t0 = Clock::now();
    // Keep every fine lattice point inside the ROI map so scale-1 features need no forward.
    double lattice_extent = 0.0;
    for (double v : config_.fine_lattice) lattice_extent = std::max(lattice_extent, std::abs(v));
    const double lim_x = 0.5 * (roi_map.width - 3) - lattice_extent;
    const double lim_y = 0.5 * (roi_map.height - 3) - lattice_extent;
    auto [ox, oy] = image_offset_cells(roi_map, coarse.box->cx(), coarse.box->cy());
    ox = std::clamp(ox, -lim_x, lim_x);
    oy = std::clamp(oy, -lim_y, lim_y);
    const auto center =
        roi.cell_to_image(0.5 * (roi_map.width - 1) + ox, 0.5 * (roi_map.height - 1) + oy);
    const Box coarse_unit = Box::from_center(center[0], center[1], base_w_, base_h_);
    const double step = config_.fine_scale_step;
    const ScaledMapSet maps({
        ScaledMap{scale_ / step,
                  forward_crop(img, roi_crop_transform(coarse_unit, scale_ / step, 139, frame_w_,
                                                       frame_h_, config_.pad_value))},
        ScaledMap{scale_, roi_map},
        ScaledMap{scale_ * step,
                  forward_crop(img, roi_crop_transform(coarse_unit, scale_ * step, 139, frame_w_,
                                                       frame_h_, config_.pad_value))},
    });
    const Box coarse_box =
        Box::from_center(center[0], center[1], scale_ * base_w_, scale_ * base_h_);
    const FineResult fine =
        fine_search(scorer, maps, coarse_box, scale_, base_w_, base_h_, config_, rng_);
    diag.timings.fine_ms = ms_since(t0);
    estimate = fine.box;
    new_scale = fine.scale;
    score = fine.score;

    t0 = Clock::now();
    diag.collected = collect_samples(maps, estimate, score, &diag.warnings);
    diag.timings.collect_ms = ms_since(t0);
  }

  t0 = Clock::now();
  diag.update = maybe_update(frame_index_, score, &diag.warnings);
  diag.timings.update_ms = ms_since(t0);

  box_ = estimate;
  scale_ = new_scale;
  diag.backbone_forwards = forwards_;
  diag.timings.total_ms = ms_since(t_start);
  result.box = estimate;
  result.score = score;
  return result;
}

}  // namespace ilnet
