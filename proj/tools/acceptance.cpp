// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: ilnet_acceptance [config.json]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "ilnet/commands.hpp"
#include "ilnet/error.hpp"
#include "ilnet/geometry.hpp"
#include "ilnet/heads.hpp"

using namespace ilnet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::cout << fmt::format("{} {:2d} {}\n", ok ? "PASS" : "FAIL", id, what);
  failures += !ok;
}

double accuracy(const HeadParams& head, const std::vector<std::vector<float>>& xs, bool positive) {
  int ok = 0;
  for (const auto& x : xs) ok += (object_probability(head, x) > 0.5) == positive;
  return xs.empty() ? 0.0 : static_cast<double>(ok) / xs.size();
}

struct Outputs {
  std::string boxes, metrics, verify;
};

Outputs write_run(const fs::path& dir, const TrackRun& run, const VerifyOptions& vopt) {
  write_results(dir, run.rows, run.metrics ? &*run.metrics : nullptr, {});
  std::ofstream(dir / "verify.json", std::ios::binary) << verify_json(run_verify(vopt));
  return {slurp(dir / "boxes.csv"), slurp(dir / "metrics.json"), slurp(dir / "verify.json")};
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const fs::path config_path = argc > 1 ? fs::path(argv[1]) : fs::path(ILNET_ACCEPTANCE_CONFIG);
    const RunConfig config = load_run_config(config_path);
    if (!config.synth_spec) throw ConfigError("acceptance config needs synth_spec");
    const SynthSpec spec = load_synth_spec(*config.synth_spec);
    VerifyOptions vopt;
    vopt.seed = config.seed;

    // 1
    {
      const auto t0 = Clock::now();
      const auto c = check_geometry_sizes();
      const double sec = seconds_since(t0);
      report(1, c.passed && sec < 1.0,
             fmt::format("conv3 sizes 107/139/299 -> {}, {:.3f} s", c.details["sizes"].dump(), sec));
    }
    // 2
    {
      const auto c = check_candidate_count();
      report(2, c.passed, fmt::format("candidate windows on 15x15: {}", c.observed));
    }
    // 3
    {
      const auto t0 = Clock::now();
      const auto c = check_integer_shift(vopt);
      const double sec = seconds_since(t0);
      report(3, c.passed && sec < 30.0 && vopt.shift_instances >= 100,
             fmt::format("integer shift max |diff| {:.3g} (<= 1e-4) over {} instances, {:.2f} s",
                         c.observed, vopt.shift_instances, sec));
    }
    // 4
    {
      const auto c = check_fractional_fidelity(vopt);
      const auto& d = c.details;
      report(4, c.passed,
             fmt::format("fractional shift cosine mean {:.4f} (>= 0.95); n {} sigma {} min {:.4f} "
                         "p05 {:.4f} median {:.4f} max {:.4f}",
                         c.observed, d["samples"].get<int>(), d["blur_sigma"].get<double>(),
                         d["min"].get<double>(), d["p05"].get<double>(), d["median"].get<double>(),
                         d["max"].get<double>()));
    }
    // 5
    {
      const auto e = check_scale_endpoints(vopt);
      const auto m = check_scale_midpoint(vopt);
      report(5, e.passed && m.passed,
             fmt::format("scale endpoints {:.3g}, midpoint {:.3g} (<= 1e-6), scales {}", e.observed,
                         m.observed, e.details["scales"].dump()));
    }
    // 6
    {
      const auto f = check_flop_ratio();
      const double ref_ratio = f.details["ratios"]["vggm-geometry"].get<double>();
      const BenchReport b = run_bench(config, std::max(3, config.reps));
      report(6, ref_ratio >= 10.0 && b.candidate_speedup > 3.0,
             fmt::format("FLOP ratio reference geometry {:.2f}x (>= 10), desk {:.2f}x; measured "
                         "candidate speed-up {:.2f}x (> 3) vs reference 9.4x; frame {:.2f}x vs 8.8x",
                         ref_ratio, b.candidate_flop_ratio, b.candidate_speedup, b.frame_speedup));
    }

    const Sequence seq = synth_sequence(spec);
    const auto t0 = Clock::now();
    const TrackRun run = run_tracking(seq, config);
    const double track_sec = seconds_since(t0);

    // 7
    {
      int over = 0;
      for (const auto& d : run.diagnostics) over += d.backbone_forwards > 3;
      report(7, over == 0 && seq.frames.size() == 60,
             fmt::format("max backbone forwards per frame {} over {} tracked frames ({} over 3)",
                         run.max_forwards, run.diagnostics.size(), over));
    }
    // 8
    {
      const auto g = check_gradients(vopt);
      // Same seed and first frame as the tracking run, so this is the same trained head.
      const Tracker tracker(seq.frames.front(), seq.truth.front(), build_model(config), config.tracker);
      const auto& rep = tracker.init_report();
      const auto& head = tracker.model().object_head;
      const double npos = rep.positive_features.size(), nneg = rep.negative_features.size();
      const double acc = (accuracy(head, rep.positive_features, true) * npos +
                          accuracy(head, rep.negative_features, false) * nneg) /
                         (npos + nneg);
      report(8, g.passed && acc >= 0.95 && rep.object_loss.size() == 90,
             fmt::format("gradient rel error {:.3g} (<= 1e-3); training accuracy {:.4f} (>= 0.95) "
                         "after {} iterations",
                         g.observed, acc, rep.object_loss.size()));
    }
    // 9
    {
      const auto c = check_update_schedule();
      int run_mismatch = 0;
      for (std::size_t i = 0; i < run.diagnostics.size(); ++i) {
        const auto& d = run.diagnostics[i];
        run_mismatch += !(d.update == update_decision(d.frame_index, run.rows[i + 1].score, config.tracker));
      }
      report(9, c.passed && run_mismatch == 0,
             fmt::format("schedule mismatches stubbed {}, tracking run {}; long-term at {}",
                         c.observed, run_mismatch, c.details["long_term_frames"].dump()));
    }
    // 10
    {
      const auto c = check_hard_mining(vopt);
      report(10, c.passed, fmt::format("top-96 of 1024 mismatches {} over {} pools", c.observed,
                                       c.details["pools"].get<int>()));
    }
    // 11
    {
      double sum = 0, lo = 1;
      for (std::size_t i = 0; i < seq.truth.size(); ++i) {
        const double o = iou(run.rows[i].box, seq.truth[i]);
        sum += o;
        lo = std::min(lo, o);
      }
      const double mean = sum / seq.truth.size();
      const double step = std::hypot(spec.vx, spec.vy);
      const bool in_envelope = spec.frames == 60 && spec.motion == SynthSpec::Motion::linear &&
                               step <= 0.2 * spec.init.w && spec.scale_drift <= 1.01 &&
                               1.0 / spec.scale_drift <= 1.01;
      report(11, in_envelope && mean >= 0.6 && lo > 0.25 && track_sec < 120.0,
             fmt::format("'{}' mean IoU {:.3f} (>= 0.6), min IoU {:.3f} (> 0.25), {:.1f} s; AUC "
                         "{:.3f}, precision@20 {:.3f}",
                         spec.name, mean, lo, track_sec, run.metrics->auc, run.metrics->precision_20));
    }
    // 12
    {
      vopt.ope_trajectories = std::max(vopt.ope_trajectories, 1000);
      const auto c = check_ope_oracle(vopt);
      report(12, c.passed, fmt::format("OPE mismatches {} over {} trajectories, hand cases failed {}",
                                       c.observed, vopt.ope_trajectories,
                                       c.details["hand_case_failures"].get<int>()));
    }
    // 13
    {
      const fs::path base = fs::temp_directory_path() / "ilnet_acceptance";
      fs::remove_all(base);
      const Outputs a = write_run(base / "a", run, vopt);
      const Outputs b = write_run(base / "b", run_tracking(seq, config), vopt);
      int differ = (a.boxes != b.boxes) + (a.metrics != b.metrics) + (a.verify != b.verify);
      report(13, differ == 0,
             fmt::format("two full runs: {} of boxes.csv / metrics.json / verify.json differ", differ));
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
  std::cout << (failures ? fmt::format("{} criteria failed\n", failures) : "all criteria passed\n");
  return failures ? 1 : 0;
}
