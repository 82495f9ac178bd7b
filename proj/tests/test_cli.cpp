#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ilnet/commands.hpp"
#include "ilnet/error.hpp"

using namespace ilnet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ilnet_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run cli(const std::string& args) {
  static int counter = 0;
  const fs::path base = fs::temp_directory_path() / ("ilnet_cli_io_" + std::to_string(counter++));
  const std::string cmd = std::string(ILNET_CLI) + " " + args + " > " + base.string() + ".out 2> " +
                          base.string() + ".err";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(base.string() + ".out");
  r.err = slurp(base.string() + ".err");
  return r;
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

// Short moving sequence used by the track smoke tests.
fs::path easy_spec(const fs::path& dir) {
  write_json(dir / "synth.json", {{"frames", 6}, {"vx", 1.0}, {"vy", 0.5}});
  return dir / "synth.json";
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a)) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b)) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return false;
  for (const auto& f : fa)
    if (fs::is_regular_file(a / f) && slurp(a / f) != slurp(b / f)) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------- config parsing

TEST(RunConfig, DefaultsAndOverrides) {
  const auto d = parse_run_config(nlohmann::json::object());
  EXPECT_EQ(d.backbone, "desk");
  EXPECT_EQ(d.reps, 3);
  const auto c = parse_run_config(
      {{"seed", 7}, {"long_term_interval", 5}, {"fine_lattice", {-0.4, -0.2, 0.0, 0.2, 0.4}},
       {"backbone", "vggm-geometry"}});
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.tracker.seed, 7u);
  EXPECT_EQ(c.tracker.long_term_interval, 5);
  EXPECT_EQ(c.backbone, "vggm-geometry");
  EXPECT_EQ(backbone_by_name("vggm-geometry").input_channels, 3);
  EXPECT_EQ(backbone_by_name("desk").input_channels, 1);
}

TEST(RunConfig, EveryTrackerFieldIsAKey) {
  const auto keys = run_config_keys();
  for (const char* k : {"score_threshold", "mining_keep", "coarse_move_step", "neg_window",
                        "pad_value", "fine_scale_sigma", "init_neg", "backbone", "synth_spec"})
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(parse_run_config({{"no_such_key", 1}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"mining_keep", "many"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"reps", 2}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"sequence", "a"}, {"synth_spec", "b"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"fine_scale_draws", 3}}), ConfigError);
  EXPECT_THROW(backbone_by_name("resnet"), ConfigError);
}

TEST(SynthSpecJson, ParsesKeysAndRejectsUnknown) {
  const auto s = parse_synth_spec({{"frames", 9}, {"init", {10, 20, 30, 40}}, {"motion", "sinusoidal"},
                                   {"amp_x", 4.0}, {"scale_drift", 1.01}, {"name", "x"}});
  EXPECT_EQ(s.frames, 9);
  EXPECT_EQ(s.init, (Box{10, 20, 30, 40}));
  EXPECT_EQ(s.motion, SynthSpec::Motion::sinusoidal);
  EXPECT_EQ(s.name, "x");
  EXPECT_THROW(parse_synth_spec({{"colour", 1}}), SpecError);
  EXPECT_THROW(parse_synth_spec({{"init", {1, 2, 3}}}), SpecError);
  EXPECT_THROW(parse_synth_spec({{"motion", "zigzag"}}), SpecError);
}

// ---------------------------------------------------------------- synth

TEST(CliSynth, DefaultSpecLayout) {
  const auto d = scratch("synth_default");
  const auto r = cli("synth --out " + (d / "seq").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::is_directory(d / "seq" / "img"));
  EXPECT_TRUE(fs::exists(d / "seq" / "groundtruth_rect.txt"));
}

TEST(CliSynth, SixtyFramesAndDeterministic) {
  const auto d = scratch("synth_60");
  write_json(d / "spec.json", {{"frames", 60}, {"vx", 1.5}, {"vy", 0.8}, {"scale_drift", 1.005}});
  ASSERT_EQ(cli("synth --spec " + (d / "spec.json").string() + " --out " + (d / "a").string()).status, 0);
  ASSERT_EQ(cli("synth --spec " + (d / "spec.json").string() + " --out " + (d / "b").string()).status, 0);
  int images = 0;
  for (const auto& e : fs::directory_iterator(d / "a" / "img")) images += e.path().extension() == ".pgm";
  EXPECT_EQ(images, 60);
  const std::string gt = slurp(d / "a" / "groundtruth_rect.txt");
  EXPECT_EQ(std::count(gt.begin(), gt.end(), '\n'), 60);
  EXPECT_TRUE(same_tree(d / "a", d / "b"));
}

TEST(CliSynth, BadSpecFails) {
  const auto d = scratch("synth_bad");
  write_json(d / "spec.json", {{"frames", 60}, {"vx", 9.0}});
  const auto r = cli("synth --spec " + (d / "spec.json").string() + " --out " + (d / "x").string());
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(r.err.empty());
}

// ---------------------------------------------------------------- track

TEST(CliTrack, SyntheticSmokeAndDeterminism) {
  const auto d = scratch("track");
  write_json(d / "config.json", {{"synth_spec", easy_spec(d).string()}});
  const std::string base = "track --config " + (d / "config.json").string() + " --seed 3 --out ";
  const auto a = cli(base + (d / "a").string());
  ASSERT_EQ(a.status, 0) << a.err;
  const auto b = cli(base + (d / "b").string());
  ASSERT_EQ(b.status, 0) << b.err;
  const auto metrics = nlohmann::json::parse(slurp(d / "a" / "metrics.json"));
  EXPECT_TRUE(metrics.contains("auc"));
  EXPECT_TRUE(metrics.contains("precision_20"));
  EXPECT_EQ(slurp(d / "a" / "boxes.csv"), slurp(d / "b" / "boxes.csv"));
  EXPECT_EQ(slurp(d / "a" / "metrics.json"), slurp(d / "b" / "metrics.json"));
  const std::string boxes = slurp(d / "a" / "boxes.csv");
  EXPECT_EQ(std::count(boxes.begin(), boxes.end(), '\n'), 7);
}

TEST(CliTrack, SequenceDirectoryInput) {
  const auto d = scratch("track_seq");
  ASSERT_EQ(cli("synth --spec " + easy_spec(d).string() + " --out " + (d / "seq").string()).status, 0);
  const auto r = cli("track --seq " + (d / "seq").string() + " --out " + (d / "out").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(d / "out" / "metrics.json"));
}

TEST(CliTrack, MissingSequenceFails) {
  const auto d = scratch("track_missing");
  const auto r = cli("track --seq " + (d / "nope").string() + " --out " + (d / "out").string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("nope"), std::string::npos) << r.err;
}

TEST(CliTrack, BadConfigFails) {
  const auto d = scratch("track_badcfg");
  write_json(d / "config.json", {{"mining_kep", 96}});
  const auto r = cli("track --config " + (d / "config.json").string() + " --out " + (d / "out").string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("mining_kep"), std::string::npos) << r.err;
}

// ---------------------------------------------------------------- bench

TEST(CliBench, ReportFieldsAndSpeedup) {
  const auto d = scratch("bench");
  ASSERT_EQ(cli("bench --reps 3 --out " + (d / "a").string()).status, 0);
  ASSERT_EQ(cli("bench --reps 3 --out " + (d / "b").string()).status, 0);
  const auto a = nlohmann::json::parse(slurp(d / "a" / "bench.json"));
  const auto b = nlohmann::json::parse(slurp(d / "b" / "bench.json"));
  EXPECT_EQ(a["flops"], b["flops"]);
  EXPECT_EQ(a["candidates"], 169);
  EXPECT_EQ(a["fine_samples"], 100);
  EXPECT_GE(a["flops"]["candidate_ratio"].get<double>(), 10.0);
  EXPECT_GT(a["speedup"]["candidate"].get<double>(), 1.0);
  EXPECT_GT(a["speedup"]["frame"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(a["reference_speedup"]["candidate"].get<double>(), 9.4);
  EXPECT_DOUBLE_EQ(a["reference_speedup"]["frame"].get<double>(), 8.8);
  for (const char* k : {"median_ms", "min_ms", "max_ms"})
    EXPECT_TRUE(a["wall_clock"]["interpolated_candidate"].contains(k));
}

TEST(CliBench, TooFewRepsFails) {
  const auto d = scratch("bench_reps");
  EXPECT_NE(cli("bench --reps 2 --out " + d.string()).status, 0);
}

// ---------------------------------------------------------------- verify

TEST(CliVerify, GreenByDefault) {
  const auto d = scratch("verify");
  const auto r = cli("verify --out " + d.string());
  EXPECT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(d / "verify.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["name"] == "integer_shift_max_abs_diff") {
      found = true;
      EXPECT_LE(c["observed"].get<double>(), 1e-4);
      EXPECT_DOUBLE_EQ(c["tolerance"].get<double>(), 1e-4);
    }
  EXPECT_TRUE(found);
}

TEST(CliVerify, CorruptedBilinearFails) {
  const auto d = scratch("verify_bad");
  const auto r = cli("verify --corrupt-bilinear --out " + d.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("FAIL integer_shift_max_abs_diff:"), std::string::npos) << r.out;
}
