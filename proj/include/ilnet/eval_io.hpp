#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ilnet/geometry.hpp"
#include "ilnet/image.hpp"

namespace ilnet {

struct Sequence {
  std::string name;
  std::string source;
  std::vector<Image> frames;
  std::vector<Box> truth;  // empty, or one box per frame
};

// Binary 8-bit PGM (P5) / PPM (P6).
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& image);

// <dir>/img/NNNN.{pgm,ppm} plus <dir>/groundtruth_rect.txt ("x,y,w,h", comma, tab or
// space separated, 1-based origin). Boxes come back 0-based (x-1, y-1).
Sequence load_sequence(const std::filesystem::path& dir);

// Writes the same layout; ground truth goes out 1-based.
void write_sequence(const Sequence& seq, const std::filesystem::path& dir);

struct SynthSpec {
  enum class Motion { linear, sinusoidal };
  int width = 320;
  int height = 240;
  int frames = 60;
  Box init{140, 100, 40, 40};
  Motion motion = Motion::linear;
  double vx = 0.0;  // px per frame
  double vy = 0.0;
  double amp_x = 0.0;  // sinusoidal amplitude, px
  double amp_y = 0.0;
  double period = 60.0;  // frames
  double scale_drift = 1.0;  // size multiplier per frame
  std::uint64_t background_seed = 1;
  std::uint64_t target_seed = 2;
  double blur_sigma = 2.0;
  std::string name = "synthetic";
};

// Seeded Gaussian noise, Gaussian-blurred, rescaled to mean/stddev and rounded to 8-bit
// levels. Single channel.
Image blurred_noise(int width, int height, std::uint64_t seed, double blur_sigma, double mean,
                    double stddev);

// Exact analytic box for frame t before rounding.
Box synth_path(const SynthSpec& spec, int t);
// Ground truth: each coordinate rounded half-up.
Box synth_truth(const SynthSpec& spec, int t);

// Throws SpecError when the path leaves the frame or the target shrinks below 16 px.
Sequence synth_sequence(const SynthSpec& spec);

struct OpeResult {
  std::vector<double> precision;  // thresholds 0..50 px, step 1
  std::vector<double> success;    // IoU thresholds 0..1, step 0.05
  double precision_20 = 0.0;
  double auc = 0.0;
  friend bool operator==(const OpeResult&, const OpeResult&) = default;
};

inline constexpr int kPrecisionSamples = 51;
inline constexpr int kSuccessSamples = 21;
inline double success_threshold(int i) { return i / 20.0; }

// precision(t) = share of frames with center error <= t; success(t) = share with IoU > t,
// except at t = 1 where an exact overlap (IoU == 1) counts.
OpeResult ope_evaluate(std::span<const Box> estimates, std::span<const Box> truth);

struct TrajectoryRow {
  Box box;
  double score = 0.0;
};

// boxes.csv, metrics.json, timings.json, curves.csv under out_dir. Throws IoError.
void write_results(const std::filesystem::path& out_dir, std::span<const TrajectoryRow> trajectory,
                   const OpeResult* metrics, const std::map<std::string, double>& stage_means);

std::string metrics_json(const OpeResult& m);
OpeResult parse_metrics_json(const std::string& text);

}  // namespace ilnet
