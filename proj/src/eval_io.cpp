#include "ilnet/eval_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "ilnet/error.hpp"

namespace ilnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- PNM

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_int(const std::string& s, const fs::path& path, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IngestionError(path.string() + ": bad PNM " + what + " '" + s + "'");
  return v;
}

}  // namespace

Image read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open image " + path.string());
  const std::string magic = pnm_token(in);
  int channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw IngestionError(path.string() + ": not a binary PGM/PPM (magic '" + magic + "')");
  }
  const int w = parse_int(pnm_token(in), path, "width");
  const int h = parse_int(pnm_token(in), path, "height");
  const int maxval = parse_int(pnm_token(in), path, "maxval");
  if (w < 1 || h < 1 || maxval != 255)
    throw IngestionError(path.string() + ": only 8-bit images with positive size are supported");
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IngestionError(path.string() + ": truncated pixel data");
  Image img(w, h, channels);
  std::copy(raw.begin(), raw.end(), img.values.begin());
  return img;
}

void write_pnm(const fs::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw IoError("PNM output needs 1 or 3 channels: " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.values.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<unsigned char>(std::clamp(std::lround(image.values[i]), 0L, 255L));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------- sequences

Sequence load_sequence(const fs::path& dir) {
  const fs::path img_dir = dir / "img";
  const fs::path gt_path = dir / "groundtruth_rect.txt";
  if (!fs::is_directory(img_dir)) throw IngestionError("missing image directory " + img_dir.string());
  if (!fs::is_regular_file(gt_path)) throw IngestionError("missing annotations " + gt_path.string());

  std::vector<std::pair<long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(img_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    const auto stem = entry.path().stem().string();
    long num = 0;
    auto [p, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), num);
    if (ec != std::errc() || p != stem.data() + stem.size())
      throw IngestionError(entry.path().string() + ": frame name is not a number");
    files.emplace_back(num, entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw IngestionError(img_dir.string() + ": need at least 2 frames");

  Sequence seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  seq.source = dir.string();
  for (const auto& [num, path] : files) {
    seq.frames.push_back(read_pnm(path));
    const auto& f = seq.frames.back();
    const auto& first = seq.frames.front();
    if (f.width != first.width || f.height != first.height || f.channels != first.channels)
      throw IngestionError(path.string() + ": frame dimensions differ from the first frame");
  }

  std::ifstream gt(gt_path);
  std::string line;
  int lineno = 0;
  while (std::getline(gt, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    for (auto& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::istringstream ss(line);
    double v[4];
    std::string extra;
    if (!(ss >> v[0] >> v[1] >> v[2] >> v[3]) || (ss >> extra))
      throw IngestionError(gt_path.string() + ":" + std::to_string(lineno) +
                           ": expected 4 numbers x,y,w,h");
    seq.truth.push_back(Box{v[0] - 1.0, v[1] - 1.0, v[2], v[3]});
  }
  if (seq.truth.size() != seq.frames.size())
    throw IngestionError(gt_path.string() + ": " + std::to_string(seq.truth.size()) +
                         " annotations for " + std::to_string(seq.frames.size()) + " frames");
  return seq;
}

void write_sequence(const Sequence& seq, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "img", ec);
  if (ec) throw IoError("cannot create " + (dir / "img").string() + ": " + ec.message());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    write_pnm(dir / "img" / fmt::format("{:04d}.{}", i + 1, f.channels == 1 ? "pgm" : "ppm"), f);
  }
  std::ofstream gt(dir / "groundtruth_rect.txt");
  if (!gt) throw IoError("cannot write " + (dir / "groundtruth_rect.txt").string());
  for (const auto& b : seq.truth) gt << fmt::format("{},{},{},{}\n", b.x + 1, b.y + 1, b.w, b.h);
  if (!gt) throw IoError("write failed: " + (dir / "groundtruth_rect.txt").string());
}

// ---------------------------------------------------------------- synthesis

namespace {

double round_half_up(double v) { return std::floor(v + 0.5); }

void gaussian_blur(Image& img, double sigma) {
  if (sigma <= 0) return;
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  Image tmp = img;
  auto pass = [&](const Image& src, Image& dst, bool horizontal) {
    for (int r = 0; r < src.height; ++r)
      for (int c = 0; c < src.width; ++c) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          int rr = r, cc = c;
          (horizontal ? cc : rr) += i;
          rr = std::clamp(rr, 0, src.height - 1);
          cc = std::clamp(cc, 0, src.width - 1);
          acc += k[i + radius] * src.at(rr, cc);
        }
        dst.at(r, c) = static_cast<float>(acc);
      }
  };
  pass(img, tmp, true);
  pass(tmp, img, false);
}

}  // namespace

Image blurred_noise(int w, int h, std::uint64_t seed, double blur, double mean, double stddev) {
  Rng rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  Image img(w, h, 1);
  for (auto& v : img.values) v = n(rng);
  gaussian_blur(img, blur);
  double m = 0, s = 0;
  for (float v : img.values) m += v;
  m /= img.values.size();
  for (float v : img.values) s += (v - m) * (v - m);
  s = std::sqrt(s / img.values.size());
  for (auto& v : img.values)
    v = static_cast<float>(std::clamp(std::round(mean + (v - m) / (s > 0 ? s : 1) * stddev), 0.0, 255.0));
  return img;
}

Box synth_path(const SynthSpec& spec, int t) {
  double cx = spec.init.cx() + spec.vx * t;
  double cy = spec.init.cy() + spec.vy * t;
  if (spec.motion == SynthSpec::Motion::sinusoidal) {
    const double phase = 2 * std::numbers::pi * t / spec.period;
    cx += spec.amp_x * std::sin(phase);
    cy += spec.amp_y * std::sin(phase);
  }
  const double m = std::pow(spec.scale_drift, t);
  return Box::from_center(cx, cy, spec.init.w * m, spec.init.h * m);
}

Box synth_truth(const SynthSpec& spec, int t) {
  const Box b = synth_path(spec, t);
  return Box{round_half_up(b.x), round_half_up(b.y), round_half_up(b.w), round_half_up(b.h)};
}

Sequence synth_sequence(const SynthSpec& spec) {
  if (spec.width < 16 || spec.height < 16) throw SpecError("frame must be at least 16x16");
  if (spec.frames < 2) throw SpecError("need at least 2 frames");
  if (!(spec.scale_drift > 0)) throw SpecError("scale drift must be positive");
  if (spec.motion == SynthSpec::Motion::sinusoidal && !(spec.period > 0))
    throw SpecError("sinusoidal period must be positive");
  Sequence seq;
  seq.name = spec.name;
  seq.source = "synthetic";
  for (int t = 0; t < spec.frames; ++t) {
    const Box b = synth_truth(spec, t);
    if (b.w < 16 || b.h < 16)
      throw SpecError("target smaller than 16 px at frame " + std::to_string(t));
    if (b.x < 0 || b.y < 0 || b.x + b.w > spec.width || b.y + b.h > spec.height)
      throw SpecError("target leaves the frame at frame " + std::to_string(t));
    seq.truth.push_back(b);
  }
  const Image background =
      blurred_noise(spec.width, spec.height, spec.background_seed, spec.blur_sigma, 128.0, 40.0);
  const int tw = static_cast<int>(seq.truth.front().w);
  const int th = static_cast<int>(seq.truth.front().h);
  const Image pattern = blurred_noise(tw, th, spec.target_seed, 0.8, 110.0, 60.0);
  constexpr int kBorder = 2;
  for (const Box& b : seq.truth) {
    Image frame = background;
    const int x0 = static_cast<int>(b.x), y0 = static_cast<int>(b.y);
    const int w = static_cast<int>(b.w), h = static_cast<int>(b.h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        float v;
        if (r < kBorder || c < kBorder || r >= h - kBorder || c >= w - kBorder) {
          v = 255.0f;
        } else {
          // Bilinear resample of the pattern onto the current size.
          const double sy = std::clamp((r + 0.5) * th / h - 0.5, 0.0, th - 1.0);
          const double sx = std::clamp((c + 0.5) * tw / w - 0.5, 0.0, tw - 1.0);
          const int py = static_cast<int>(sy), px = static_cast<int>(sx);
          const int py1 = std::min(py + 1, th - 1), px1 = std::min(px + 1, tw - 1);
          const double fy = sy - py, fx = sx - px;
          const double top = (1 - fx) * pattern.at(py, px) + fx * pattern.at(py, px1);
          const double bot = (1 - fx) * pattern.at(py1, px) + fx * pattern.at(py1, px1);
          v = static_cast<float>(std::round((1 - fy) * top + fy * bot));
        }
        frame.at(y0 + r, x0 + c) = v;
      }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

// ---------------------------------------------------------------- OPE

OpeResult ope_evaluate(std::span<const Box> estimates, std::span<const Box> truth) {
  if (estimates.size() != truth.size())
    throw InputError("estimate count " + std::to_string(estimates.size()) +
                     " differs from ground-truth count " + std::to_string(truth.size()));
  if (estimates.empty()) throw InputError("no frames to evaluate");
  const std::size_t n = estimates.size();
  std::vector<double> err(n), ov(n);
  for (std::size_t i = 0; i < n; ++i) {
    err[i] = center_error(estimates[i], truth[i]);
    ov[i] = iou(estimates[i], truth[i]);
  }
  OpeResult r;
  for (int t = 0; t < kPrecisionSamples; ++t)
    r.precision.push_back(static_cast<double>(std::count_if(err.begin(), err.end(),
                                                            [&](double e) { return e <= t; })) /
                          n);
  for (int i = 0; i < kSuccessSamples; ++i) {
    const double th = success_threshold(i);
    // Nothing can exceed IoU 1, so the last sample counts exact overlaps instead.
    const auto passes = [&](double o) { return i + 1 == kSuccessSamples ? o >= 1.0 : o > th; };
    r.success.push_back(static_cast<double>(std::count_if(ov.begin(), ov.end(), passes)) / n);
  }
  r.precision_20 = r.precision[20];
  double sum = 0;
  for (double s : r.success) sum += s;
  r.auc = sum / kSuccessSamples;
  return r;
}

// ---------------------------------------------------------------- results

std::string metrics_json(const OpeResult& m) {
  nlohmann::ordered_json j;
  j["precision_20"] = m.precision_20;
  j["auc"] = m.auc;
  j["precision_thresholds_px"] = {0, 50, 1};
  j["precision_curve"] = m.precision;
  j["success_thresholds"] = {0.0, 1.0, 0.05};
  j["success_curve"] = m.success;
  return j.dump(2) + "\n";
}

OpeResult parse_metrics_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  OpeResult m;
  m.precision_20 = j.at("precision_20").get<double>();
  m.auc = j.at("auc").get<double>();
  m.precision = j.at("precision_curve").get<std::vector<double>>();
  m.success = j.at("success_curve").get<std::vector<double>>();
  return m;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_results(const fs::path& out_dir, std::span<const TrajectoryRow> trajectory,
                   const OpeResult* metrics, const std::map<std::string, double>& stage_means) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::string boxes = "frame,x,y,w,h,score\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& r = trajectory[i];
    boxes += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", i + 1, r.box.x, r.box.y,
                         r.box.w, r.box.h, r.score);
  }
  write_text(out_dir / "boxes.csv", boxes);

  if (metrics) {
    write_text(out_dir / "metrics.json", metrics_json(*metrics));
    std::string curves = "plot,threshold,value\n";
    for (std::size_t t = 0; t < metrics->precision.size(); ++t)
      curves += fmt::format("precision,{},{:.6f}\n", t, metrics->precision[t]);
    for (std::size_t i = 0; i < metrics->success.size(); ++i)
      curves += fmt::format("success,{:.2f},{:.6f}\n", success_threshold(static_cast<int>(i)),
                            metrics->success[i]);
    write_text(out_dir / "curves.csv", curves);
  }

  nlohmann::ordered_json t;
  for (const auto& [k, v] : stage_means) t[k] = v;
  write_text(out_dir / "timings.json", t.dump(2) + "\n");
}

}  // namespace ilnet
