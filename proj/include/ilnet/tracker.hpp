#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ilnet/feature_interp.hpp"
#include "ilnet/geometry.hpp"
#include "ilnet/heads.hpp"
#include "ilnet/image.hpp"
#include "ilnet/model.hpp"

namespace ilnet {

struct TrackerConfig {
  double score_threshold = 0.5;
  double pos_iou = 0.7;
  double neg_iou = 0.5;
  std::vector<double> init_scales = {1.0 / 1.2, 1.0, 1.2};
  double fine_scale_step = 1.05;
  int long_term_interval = 10;

  // Per successful frame.
  int frame_pos = 30;
  int frame_loc = 30;
  int frame_neg = 100;
  // Initial frame.
  int init_pos = 500;
  int init_loc = 500;
  int init_neg = 2500;
  double init_far_fraction = 0.5;

  int init_iterations = 90;
  int online_iterations = 10;
  int object_batch = 128;
  int loc_batch = 65;
  int mining_pool = 1024;
  int mining_keep = 96;
  double lr_hidden = 1e-3;
  double lr_final = 1e-2;
  double momentum = 0.9;
  double weight_decay = 5e-4;

  double coarse_move_step = 8.0 / 75.0;
  std::vector<double> fine_lattice = {-0.4, -0.2, 0.0, 0.2, 0.4};
  int fine_scale_draws = 4;
  double fine_scale_sigma = 0.05;
  int fine_top = 3;

  int long_window = 100;
  int short_window = 20;
  int neg_window = 20;

  // Box samplers (trans sigma relative to mean(w, h); scale sigma in 1.2-exponent units).
  double pos_trans_sigma = 0.1;
  double pos_scale_sigma = 1.0;
  double loc_trans_sigma = 0.03;
  double loc_offset = 8.0 / 75.0;
  double loc_scale_sigma = 0.3;
  double neg_trans_sigma = 0.6;
  double far_scale_sigma = 1.0;

  float pad_value = 128.0f;
  std::uint64_t seed = 0;

  void validate() const;
  SgdConfig sgd(int iterations) const;
  HardNegativeMiner miner() const { return {mining_pool, mining_keep}; }
};

// Scores 3x3xC conv3 windows.
class Scorer {
 public:
  virtual ~Scorer() = default;
  // Positive-class probability.
  virtual double object_score(const FeatureMap& window) const = 0;
  virtual LocClass locate(const FeatureMap& window) const = 0;
};

class ModelScorer final : public Scorer {
 public:
  explicit ModelScorer(const NetworkModel& model) : model_(model) {}
  double object_score(const FeatureMap& window) const override;
  LocClass locate(const FeatureMap& window) const override;

 private:
  const NetworkModel& model_;
};

struct SampleRecord {
  int frame = 0;
  int label = 0;
  std::vector<float> features;
};

// Feature records with non-decreasing frame tags; keeps only the newest frames.
class SampleBank {
 public:
  explicit SampleBank(int window_frames = 1) : window_(window_frames) {}
  void add(int frame, int label, std::vector<float> features);
  // Drop records outside the newest window_frames distinct frames.
  void evict();
  std::size_t size() const { return records_.size(); }
  const std::deque<SampleRecord>& records() const { return records_; }
  int window() const { return window_; }
  int frame_count() const;
  // Views of records from the newest `frames` distinct frames, in bank order.
  std::vector<const SampleRecord*> newest(int frames) const;

 private:
  int window_;
  std::deque<SampleRecord> records_;
};

struct SampleStore {
  SampleBank positives;
  SampleBank localization;
  SampleBank negatives;
};

struct MovedCandidate {
  Box box;
  double score = 0.0;
  int grid_index = 0;  // row-major position in the candidate grid
};

struct CoarseResult {
  std::optional<Box> box;
  double best_score = 0.0;
  int survivors = 0;
};

// Order-independent: maximizes the summed IoU against the other candidates; ties go
// to the higher score, then the lower grid index. Requires a non-empty input.
std::size_t select_by_overlap(std::span<const MovedCandidate> moved);

// Scores every window of the ROI map, moves survivors by their localization class, and
// picks the most-overlapped moved box.
CoarseResult coarse_localize(const Scorer& scorer, const FeatureMap& roi_map,
                             const CropTransform& roi, const TrackerConfig& config);

struct FineSample {
  Box box;
  double scale = 1.0;  // absolute scale multiplier of the base target size
  double score = 0.0;
};

struct FineResult {
  Box box;
  double scale = 1.0;
  double score = 0.0;
  std::vector<FineSample> samples;
};

// Lattice offsets x scale draws around `coarse`, featurized from `maps`, top-k averaged.
FineResult fine_search(const Scorer& scorer, const ScaledMapSet& maps, const Box& coarse,
                       double current_scale, double base_w, double base_h,
                       const TrackerConfig& config, Rng& rng);

// Interpolated 3x3 window features for a box whose size is scale * base size,
// or nullopt when the set cannot reach it.
std::optional<FeatureMap> interpolate_box(const ScaledMapSet& maps, const Box& box, double base_w);

struct UpdateDecision {
  bool long_term = false;
  bool short_term = false;
  friend bool operator==(const UpdateDecision&, const UpdateDecision&) = default;
};

UpdateDecision update_decision(int frame_index, double score, const TrackerConfig& config);

struct StageTimings {
  double roi_forward_ms = 0.0;
  double coarse_ms = 0.0;
  double fine_ms = 0.0;
  double collect_ms = 0.0;
  double update_ms = 0.0;
  double total_ms = 0.0;
};

struct TrackDiagnostics {
  int frame_index = 0;
  int backbone_forwards = 0;
  int survivors = 0;
  bool detected = false;
  bool collected = false;
  UpdateDecision update;
  StageTimings timings;
  std::vector<std::string> warnings;
};

struct TrackResult {
  Box box;
  double score = 0.0;
  TrackDiagnostics diagnostics;
};

struct InitReport {
  std::vector<double> object_loss;
  std::vector<double> loc_loss;
  int close_negatives = 0;
  int far_negatives = 0;
  int backbone_forwards = 0;
  // Training-set features, kept for inspection.
  std::vector<std::vector<float>> positive_features;
  std::vector<std::vector<float>> negative_features;
  std::vector<std::vector<float>> loc_features;
  std::vector<int> loc_labels;
};

class Tracker {
 public:
  // Trains both heads on the first frame. Throws InputError for a degenerate box.
  Tracker(const Image& first_frame, const Box& init_box, NetworkModel model,
          TrackerConfig config);

  TrackResult track(const Image& frame);

  // Trains on the stored samples when the schedule says so.
  UpdateDecision maybe_update(int frame_index, double score, std::vector<std::string>* warnings);

  const NetworkModel& model() const { return model_; }
  const TrackerConfig& config() const { return config_; }
  const SampleStore& store() const { return store_; }
  const InitReport& init_report() const { return init_report_; }
  const Box& box() const { return box_; }
  double scale() const { return scale_; }
  int frame_index() const { return frame_index_; }
  double base_w() const { return base_w_; }
  double base_h() const { return base_h_; }

  // Adds interpolated training samples around `estimated` from `maps` when score passes.
  bool collect_samples(const ScaledMapSet& maps, const Box& estimated, double score,
                       std::vector<std::string>* warnings);

 private:
  Image prepare(const Image& frame) const;
  FeatureMap forward_crop(const Image& frame, const CropTransform& t);
  void train(int pos_frames, int loc_frames, int iterations);

  NetworkModel model_;
  TrackerConfig config_;
  SampleStore store_;
  Rng rng_;
  MomentumState object_momentum_;
  MomentumState loc_momentum_;
  Box box_;
  double scale_ = 1.0;
  double base_w_ = 0.0;
  double base_h_ = 0.0;
  int frame_index_ = 0;
  int frame_w_ = 0;
  int frame_h_ = 0;
  int forwards_ = 0;
  InitReport init_report_;
};

}  // namespace ilnet
