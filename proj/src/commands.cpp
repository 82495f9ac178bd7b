#include "ilnet/commands.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include "ilnet/error.hpp"

namespace ilnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Field = std::variant<double TrackerConfig::*, int TrackerConfig::*,
                           std::vector<double> TrackerConfig::*, float TrackerConfig::*>;

const std::vector<std::pair<std::string, Field>>& tracker_fields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      {"score_threshold", &TrackerConfig::score_threshold},
      {"pos_iou", &TrackerConfig::pos_iou},
      {"neg_iou", &TrackerConfig::neg_iou},
      {"init_scales", &TrackerConfig::init_scales},
      {"fine_scale_step", &TrackerConfig::fine_scale_step},
      {"long_term_interval", &TrackerConfig::long_term_interval},
      {"frame_pos", &TrackerConfig::frame_pos},
      {"frame_loc", &TrackerConfig::frame_loc},
      {"frame_neg", &TrackerConfig::frame_neg},
      {"init_pos", &TrackerConfig::init_pos},
      {"init_loc", &TrackerConfig::init_loc},
      {"init_neg", &TrackerConfig::init_neg},
      {"init_far_fraction", &TrackerConfig::init_far_fraction},
      {"init_iterations", &TrackerConfig::init_iterations},
      {"online_iterations", &TrackerConfig::online_iterations},
      {"object_batch", &TrackerConfig::object_batch},
      {"loc_batch", &TrackerConfig::loc_batch},
      {"mining_pool", &TrackerConfig::mining_pool},
      {"mining_keep", &TrackerConfig::mining_keep},
      {"lr_hidden", &TrackerConfig::lr_hidden},
      {"lr_final", &TrackerConfig::lr_final},
      {"momentum", &TrackerConfig::momentum},
      {"weight_decay", &TrackerConfig::weight_decay},
      {"coarse_move_step", &TrackerConfig::coarse_move_step},
      {"fine_lattice", &TrackerConfig::fine_lattice},
      {"fine_scale_draws", &TrackerConfig::fine_scale_draws},
      {"fine_scale_sigma", &TrackerConfig::fine_scale_sigma},
      {"fine_top", &TrackerConfig::fine_top},
      {"long_window", &TrackerConfig::long_window},
      {"short_window", &TrackerConfig::short_window},
      {"neg_window", &TrackerConfig::neg_window},
      {"pos_trans_sigma", &TrackerConfig::pos_trans_sigma},
      {"pos_scale_sigma", &TrackerConfig::pos_scale_sigma},
      {"loc_trans_sigma", &TrackerConfig::loc_trans_sigma},
      {"loc_offset", &TrackerConfig::loc_offset},
      {"loc_scale_sigma", &TrackerConfig::loc_scale_sigma},
      {"neg_trans_sigma", &TrackerConfig::neg_trans_sigma},
      {"far_scale_sigma", &TrackerConfig::far_scale_sigma},
      {"pad_value", &TrackerConfig::pad_value},
  };
  return fields;
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys = {"backbone", "weights", "seed", "reps", "sequence", "synth_spec"};
  for (const auto& [name, _] : tracker_fields()) keys.push_back(name);
  return keys;
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "backbone") {
      c.backbone = get_as<std::string>(v, key);
    } else if (key == "weights") {
      c.weights = get_as<std::string>(v, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "reps") {
      c.reps = get_as<int>(v, key);
    } else if (key == "sequence") {
      c.sequence = get_as<std::string>(v, key);
    } else if (key == "synth_spec") {
      c.synth_spec = get_as<std::string>(v, key);
    } else {
      const auto& fields = tracker_fields();
      auto it = std::find_if(fields.begin(), fields.end(),
                             [&](const auto& f) { return f.first == key; });
      if (it == fields.end()) throw ConfigError("unknown config key '" + key + "'");
      std::visit(
          [&](auto member) {
            using T = std::remove_reference_t<decltype(c.tracker.*member)>;
            c.tracker.*member = get_as<T>(v, key);
          },
          it->second);
    }
  }
  if (c.sequence && c.synth_spec) throw ConfigError("give either 'sequence' or 'synth_spec', not both");
  if (c.reps < 3) throw ConfigError("reps must be at least 3");
  backbone_by_name(c.backbone);
  c.tracker.seed = c.seed;
  c.tracker.validate();
  return c;
}

// Relative sequence, synth_spec and weights paths resolve against the config's directory.
RunConfig load_run_config(const fs::path& path) {
  RunConfig c = parse_run_config(read_json(path));
  const fs::path base = path.parent_path();
  for (auto* field : {&c.sequence, &c.synth_spec, &c.weights})
    if (*field && fs::path(**field).is_relative()) **field = (base / **field).string();
  return c;
}

SynthSpec parse_synth_spec(const json& j) {
  if (!j.is_object()) throw SpecError("synth spec must be a JSON object");
  SynthSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "width") s.width = v.get<int>();
      else if (key == "height") s.height = v.get<int>();
      else if (key == "frames") s.frames = v.get<int>();
      else if (key == "init") {
        const auto a = v.get<std::vector<double>>();
        if (a.size() != 4) throw SpecError("'init' needs [x, y, w, h]");
        s.init = Box{a[0], a[1], a[2], a[3]};
      } else if (key == "motion") {
        const auto m = v.get<std::string>();
        if (m == "linear") s.motion = SynthSpec::Motion::linear;
        else if (m == "sinusoidal") s.motion = SynthSpec::Motion::sinusoidal;
        else throw SpecError("unknown motion '" + m + "'");
      } else if (key == "vx") s.vx = v.get<double>();
      else if (key == "vy") s.vy = v.get<double>();
      else if (key == "amp_x") s.amp_x = v.get<double>();
      else if (key == "amp_y") s.amp_y = v.get<double>();
      else if (key == "period") s.period = v.get<double>();
      else if (key == "scale_drift") s.scale_drift = v.get<double>();
      else if (key == "background_seed") s.background_seed = v.get<std::uint64_t>();
      else if (key == "target_seed") s.target_seed = v.get<std::uint64_t>();
      else if (key == "blur_sigma") s.blur_sigma = v.get<double>();
      else if (key == "name") s.name = v.get<std::string>();
      else throw SpecError("unknown synth spec key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad synth spec value: ") + e.what());
  }
  return s;
}

SynthSpec load_synth_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  try {
    return parse_synth_spec(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

ConvBackboneSpec backbone_by_name(const std::string& name) {
  if (name == "desk") return desk_spec(1);
  if (name == "vggm-geometry") return vggm_geometry_spec(3);
  throw ConfigError("unknown backbone '" + name + "' (expected desk or vggm-geometry)");
}

NetworkModel build_model(const RunConfig& config) {
  const auto spec = backbone_by_name(config.backbone);
  Rng rng(config.seed);
  const auto hidden = config.backbone == "desk" ? desk_hidden() : vggm_hidden();
  NetworkModel model = make_model(spec, hidden, rng);
  if (config.weights) model = read_weight_file(*config.weights, model);
  return model;
}

TrackRun run_tracking(const Sequence& seq, const RunConfig& config) {
  if (seq.frames.empty()) throw InputError("sequence has no frames");
  if (seq.truth.empty()) throw InputError("sequence needs an initial box (ground truth)");
  TrackRun run;
  Tracker tracker(seq.frames.front(), seq.truth.front(), build_model(config), config.tracker);
  run.init = tracker.init_report();
  run.max_forwards = run.init.backbone_forwards;
  run.rows.push_back(TrajectoryRow{tracker.box(), 1.0});
  for (std::size_t i = 1; i < seq.frames.size(); ++i) {
    TrackResult r = tracker.track(seq.frames[i]);
    run.rows.push_back(TrajectoryRow{r.box, r.score});
    run.diagnostics.push_back(std::move(r.diagnostics));
  }
  run.max_forwards = 0;
  for (const auto& d : run.diagnostics) run.max_forwards = std::max(run.max_forwards, d.backbone_forwards);
  if (seq.truth.size() == seq.frames.size()) {
    std::vector<Box> est;
    for (const auto& r : run.rows) est.push_back(r.box);
    run.metrics = ope_evaluate(est, seq.truth);
  }
  return run;
}

std::map<std::string, double> stage_means(const TrackRun& run) {
  std::map<std::string, double> m;
  if (run.diagnostics.empty()) return m;
  for (const auto& d : run.diagnostics) {
    m["roi_forward_ms"] += d.timings.roi_forward_ms;
    m["coarse_ms"] += d.timings.coarse_ms;
    m["fine_ms"] += d.timings.fine_ms;
    m["collect_ms"] += d.timings.collect_ms;
    m["update_ms"] += d.timings.update_ms;
    m["total_ms"] += d.timings.total_ms;
  }
  for (auto& [k, v] : m) v /= static_cast<double>(run.diagnostics.size());
  return m;
}

// ---------------------------------------------------------------- commands

namespace {

template <class F>
int guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "ilnet " << command << ": " << e.what() << '\n';
    return 1;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

int cmd_track(const TrackArgs& args) {
  return guarded("track", [&] {
    RunConfig config = args.config ? load_run_config(*args.config) : parse_run_config(json::object());
    if (args.seed) {
      config.seed = *args.seed;
      config.tracker.seed = *args.seed;
    }
    if (args.seq) {
      config.sequence = *args.seq;
      config.synth_spec.reset();
    }
    Sequence seq;
    if (config.sequence) {
      if (!fs::is_directory(*config.sequence))
        throw InputError("sequence directory not found: " + *config.sequence);
      seq = load_sequence(*config.sequence);
    } else if (config.synth_spec) {
      seq = synth_sequence(load_synth_spec(*config.synth_spec));
    } else {
      throw ConfigError("no input: pass --seq or set 'sequence' / 'synth_spec' in the config");
    }
    const TrackRun run = run_tracking(seq, config);
    write_results(args.out, run.rows, run.metrics ? &*run.metrics : nullptr, stage_means(run));
    for (const auto& d : run.diagnostics)
      for (const auto& w : d.warnings) std::cerr << "frame " << d.frame_index + 1 << ": " << w << '\n';
    if (run.metrics)
      std::cout << fmt::format("{}: {} frames, precision@20 {:.4f}, AUC {:.4f}\n", seq.name,
                               seq.frames.size(), run.metrics->precision_20, run.metrics->auc);
    else
      std::cout << fmt::format("{}: {} frames tracked\n", seq.name, seq.frames.size());
    return 0;
  });
}

int cmd_bench(const BenchArgs& args) {
  return guarded("bench", [&] {
    RunConfig config = args.config ? load_run_config(*args.config) : parse_run_config(json::object());
    const int reps = args.reps.value_or(config.reps);
    if (reps < 3) throw ConfigError("--reps must be at least 3");
    const BenchReport r = run_bench(config, reps);
    make_dir(args.out);
    write_file(fs::path(args.out) / "bench.json", bench_json(r).dump(2) + "\n");
    std::cout << fmt::format(
        "backbone {}: candidate FLOP ratio {:.2f}x, measured {:.2f}x (median of {}); "
        "frame FLOP ratio {:.2f}x, measured {:.2f}x; reference figures 9.4x / 8.8x\n",
        r.backbone, r.candidate_flop_ratio, r.candidate_speedup, r.reps, r.frame_flop_ratio,
        r.frame_speedup);
    return 0;
  });
}

int cmd_verify(const std::string& out, const VerifyOptions& opt) {
  return guarded("verify", [&] {
    const auto checks = run_verify(opt);
    make_dir(out);
    write_file(fs::path(out) / "verify.json", verify_json(checks));
    bool ok = true;
    for (const auto& c : checks) {
      std::cout << fmt::format("{} {}: observed {:.6g} {} {:.6g}\n", c.passed ? "PASS" : "FAIL",
                               c.name, c.observed, c.comparison, c.tolerance);
      ok = ok && c.passed;
    }
    return ok ? 0 : 2;
  });
}

int cmd_synth(const std::optional<std::string>& spec, const std::string& out) {
  return guarded("synth", [&] {
    const SynthSpec s = spec ? load_synth_spec(*spec) : SynthSpec{};
    const Sequence seq = synth_sequence(s);
    write_sequence(seq, out);
    std::cout << fmt::format("wrote {} frames to {}\n", seq.frames.size(), out);
    return 0;
  });
}

}  // namespace ilnet
