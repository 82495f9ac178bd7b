#include <CLI11.hpp>

#include "ilnet/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ilnet: CNN tracking with interpolated convolutional features"};
  app.require_subcommand(1);

  ilnet::TrackArgs track;
  auto* t = app.add_subcommand("track", "track a sequence and write boxes and metrics");
  t->add_option("--seq", track.seq, "sequence directory (img/ + groundtruth_rect.txt)");
  t->add_option("--config", track.config, "JSON run configuration");
  t->add_option("--seed", track.seed, "random seed");
  t->add_option("--out", track.out, "output directory")->required();

  ilnet::BenchArgs bench;
  auto* b = app.add_subcommand("bench", "time interpolated vs per-patch feature extraction");
  b->add_option("--config", bench.config, "JSON run configuration");
  b->add_option("--reps", bench.reps, "repetitions (at least 3)");
  b->add_option("--out", bench.out, "output directory")->required();

  std::string verify_out;
  ilnet::VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "run the invariant and oracle checks");
  v->add_option("--out", verify_out, "output directory")->required();
  v->add_option("--seed", verify.seed, "random seed");
  v->add_flag("--corrupt-bilinear", verify.corrupt_bilinear,
              "fault injection: skew the bilinear weights");

  std::optional<std::string> synth_spec;
  std::string synth_out;
  auto* s = app.add_subcommand("synth", "write a synthetic sequence");
  s->add_option("--spec", synth_spec, "JSON synthetic sequence spec (defaults if omitted)");
  s->add_option("--out", synth_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  if (*t) return ilnet::cmd_track(track);
  if (*b) return ilnet::cmd_bench(bench);
  if (*v) return ilnet::cmd_verify(verify_out, verify);
  return ilnet::cmd_synth(synth_spec, synth_out);
}
