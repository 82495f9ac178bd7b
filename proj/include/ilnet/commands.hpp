#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilnet/eval_io.hpp"
#include "ilnet/model.hpp"
#include "ilnet/tracker.hpp"

namespace ilnet {

// Flat JSON run configuration. Keys: backbone ("desk" | "vggm-geometry"), weights,
// seed, reps, sequence, synth_spec, plus every TrackerConfig field by name.
struct RunConfig {
  std::string backbone = "desk";
  std::optional<std::string> weights;
  std::uint64_t seed = 0;
  int reps = 3;
  std::optional<std::string> sequence;
  std::optional<std::string> synth_spec;
  TrackerConfig tracker;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
std::vector<std::string> run_config_keys();

// Keys: width, height, frames, init [x,y,w,h], motion, vx, vy, amp_x, amp_y, period,
// scale_drift, background_seed, target_seed, blur_sigma, name.
SynthSpec parse_synth_spec(const nlohmann::json& j);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// "desk" takes gray input, "vggm-geometry" RGB.
ConvBackboneSpec backbone_by_name(const std::string& name);
// Random weights from the seed, optionally overwritten from the weight file.
NetworkModel build_model(const RunConfig& config);

struct TrackRun {
  std::vector<TrajectoryRow> rows;
  std::vector<TrackDiagnostics> diagnostics;
  std::optional<OpeResult> metrics;
  InitReport init;
  int max_forwards = 0;
};

// Initializes on frame 0 with truth[0] and tracks through the remaining frames.
TrackRun run_tracking(const Sequence& seq, const RunConfig& config);
std::map<std::string, double> stage_means(const TrackRun& run);

// ---------------------------------------------------------------- benchmark

struct TimingStats {
  double median_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

TimingStats timing_stats(std::vector<double> samples_ms);

struct BenchReport {
  std::string backbone;
  int reps = 0;
  int candidates = 0;
  int fine_samples = 0;
  // Analytic multiply-accumulates.
  std::uint64_t macs_107 = 0;
  std::uint64_t macs_139 = 0;
  std::uint64_t macs_299 = 0;
  double candidate_flop_ratio = 0.0;  // candidates * macs(107) / macs(299)
  double frame_flop_ratio = 0.0;      // (candidates + fine) * macs(107) / (macs(299) + 2 macs(139))
  TimingStats interp_candidate;
  TimingStats brute_candidate;
  TimingStats interp_fine;
  TimingStats brute_fine;
  TimingStats interp_frame;
  TimingStats brute_frame;
  double candidate_speedup = 0.0;
  double frame_speedup = 0.0;
};

BenchReport run_bench(const RunConfig& config, int reps);
nlohmann::ordered_json bench_json(const BenchReport& report);

// ---------------------------------------------------------------- verification

struct CheckResult {
  std::string name;
  std::string comparison;  // "<=", ">=", "==", ">"
  double tolerance = 0.0;
  double observed = 0.0;
  bool passed = false;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int shift_instances = 100;
  int fidelity_instances = 40;
  int ope_trajectories = 1000;
  bool corrupt_bilinear = false;  // fault injection: skews bilinear weights
};

CheckResult check_geometry_sizes();
CheckResult check_candidate_count();
CheckResult check_integer_shift(const VerifyOptions& opt);
CheckResult check_fractional_fidelity(const VerifyOptions& opt);
CheckResult check_bilinear_linearity(const VerifyOptions& opt);
CheckResult check_scale_endpoints(const VerifyOptions& opt);
CheckResult check_scale_midpoint(const VerifyOptions& opt);
CheckResult check_flop_ratio();
CheckResult check_gradients(const VerifyOptions& opt);
CheckResult check_softmax(const VerifyOptions& opt);
CheckResult check_update_schedule();
CheckResult check_hard_mining(const VerifyOptions& opt);
CheckResult check_ope_oracle(const VerifyOptions& opt);
CheckResult check_weight_roundtrip(const VerifyOptions& opt);

std::vector<CheckResult> run_verify(const VerifyOptions& opt);
std::string verify_json(const std::vector<CheckResult>& checks);

// ---------------------------------------------------------------- commands
// Each returns a process exit status; diagnostics go to stderr.

struct TrackArgs {
  std::optional<std::string> seq;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out;
};
int cmd_track(const TrackArgs& args);

struct BenchArgs {
  std::optional<std::string> config;
  std::optional<int> reps;
  std::string out;
};
int cmd_bench(const BenchArgs& args);

int cmd_verify(const std::string& out, const VerifyOptions& opt);
int cmd_synth(const std::optional<std::string>& spec, const std::string& out);

}  // namespace ilnet
