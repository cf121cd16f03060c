// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ffstab/coarse/trajectory.hpp"
#include "ffstab/core/error.hpp"
#include "ffstab/core/types.hpp"
#include "ffstab/core/warp.hpp"
#include "ffstab/eval/metrics.hpp"
#include "ffstab/flow/provider.hpp"
#include "ffstab/maskprop/maskprop.hpp"
#include "ffstab/pipeline/config.hpp"
#include "ffstab/pipeline/pipeline.hpp"
#include "ffstab/pipeline/report.hpp"
#include "ffstab/synth/synth.hpp"
#include "test_support.hpp"

using namespace ffstab;
using namespace ffstab::pipeline;
using test_support::TempDir;

namespace {

// Small clip with purely similarity motion (no perspective, no movers) so the
// analytic pair poses are exact similarities.
synth::SynthClip small_clip(std::uint64_t seed, int n_frames = 10, double t_max = 10.0) {
  synth::SynthConfig cfg;
  cfg.n_frames = n_frames;
  cfg.crop_width = 96;
  cfg.crop_height = 72;
  cfg.theta_max_deg = 2.0;
  cfg.s_min = 0.97;
  cfg.s_max = 1.03;
  cfg.t_max_x = t_max;
  cfg.t_max_y = t_max * 0.7;
  cfg.p_max_x = 0.0;
  cfg.p_max_y = 0.0;
  cfg.unstable_p_min = 0.0;
  cfg.unstable_p_max = 0.0;
  cfg.n_objects_max = 0;
  cfg.rng_seed = seed;
  int bw = 0, bh = 0;
  synth::required_base_dims(cfg, bw, bh);
  synth::SynthClip clip = synth::gen_stable_video(synth::make_base_image(bw, bh, seed), cfg);
  synth::jitter_video(clip);
  return clip;
}

bool flows_equal(const FlowField& a, const FlowField& b) {
  return a.width == b.width && a.height == b.height && a.u == b.u && a.v == b.v;
}

bool frames_equal(const Frame& a, const Frame& b) {
  return a.width == b.width && a.height == b.height && a.channels == b.channels &&
         a.data == b.data && a.valid.data == b.valid.data;
}

bool poses_equal(const std::vector<AffinePose>& a, const std::vector<AffinePose>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].theta != b[i].theta || a[i].s != b[i].s || a[i].dx != b[i].dx ||
        a[i].dy != b[i].dy) {
      return false;
    }
  }
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.is_open());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Provider stub: a fixed similarity flow with a constant confidence value.
class StubProvider : public flow::FlowProvider {
 public:
  StubProvider(AffinePose pose, float conf) : pose_(pose), conf_(conf) {}
  flow::FlowResult estimate(const Frame&, const Frame& tgt, int, int) override {
    flow::FlowResult r;
    r.flow = affine_flow(pose_, tgt.width, tgt.height);
    r.confidence = ConfidenceMap(tgt.width, tgt.height, conf_);
    return r;
  }

 private:
  AffinePose pose_;
  float conf_;
};

}  // namespace

TEST_CASE("config text round-trips through the parser") {
  PipelineConfig cfg;
  cfg.workers = 3;
  cfg.provider = Provider::kOracle;
  cfg.seed = 42;
  cfg.fine_window = 5;
  cfg.outpaint_neighbors = 1;
  cfg.synth.n_frames = 24;
  cfg.synth.t_max_x = 33.5;
  cfg.synth.jitter_walk = true;
  cfg.maskprop.delta_c = 0.25;
  cfg.pose.huber_delta = 2.5;
  cfg.smooth.window = 12;
  cfg.fine.iters = 17;
  cfg.outpaint.literal_alg3 = true;
  cfg.outpaint.eta_u = 12345.0;

  TempDir tmp;
  const std::string path = tmp.file("pipeline.cfg");
  write_config(path, cfg);
  const PipelineConfig back = parse_config(path);
  CHECK(config_text(back) == config_text(cfg));
  CHECK(back.provider == Provider::kOracle);
  CHECK(back.synth.jitter_walk);
  CHECK(back.outpaint.eta_u == 12345.0);

  CHECK(std::string(provider_name(Provider::kClassical)) == "classical");
  CHECK(provider_from_name("oracle") == Provider::kOracle);
  CHECK_THROWS_AS(provider_from_name("deep"), invalid_argument);
}

TEST_CASE("config parsing rejects unknown names and malformed input") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(apply_config_line(cfg, "nosuch", "x", "1"), invalid_argument);
  CHECK_THROWS_AS(apply_config_line(cfg, "pipeline", "nosuch", "1"), invalid_argument);
  CHECK_THROWS_AS(apply_config_line(cfg, "pipeline", "workers", "many"), invalid_argument);
  CHECK_THROWS_AS(apply_config_line(cfg, "synth", "t_max_x", "wide"), invalid_argument);
  CHECK_THROWS_AS(apply_config_line(cfg, "outpaint", "literal_alg3", "maybe"), invalid_argument);
  apply_config_line(cfg, "pipeline", "workers", "2");
  CHECK(cfg.workers == 2);

  TempDir tmp;
  CHECK_THROWS_AS(parse_config(tmp.file("absent.cfg")), io_error);

  {
    std::ofstream out(tmp.file("orphan.cfg"));
    out << "workers = 2\n";
  }
  CHECK_THROWS_AS(parse_config(tmp.file("orphan.cfg")), invalid_argument);

  {
    std::ofstream out(tmp.file("broken.cfg"));
    out << "[pipeline]\nworkers\n";
  }
  CHECK_THROWS_AS(parse_config(tmp.file("broken.cfg")), invalid_argument);

  {
    std::ofstream out(tmp.file("ok.cfg"));
    out << "# comment only\n\n[pipeline]\nseed = 7   # trailing comment\n";
  }
  CHECK(parse_config(tmp.file("ok.cfg")).seed == 7);
}

TEST_CASE("pair estimation matches direct provider calls for any worker count") {
  const synth::SynthClip clip = small_clip(301, 8);
  flow::OracleFlowProvider oracle(clip, flow::OracleFlowProvider::Stream::kUnstable);

  const PairData serial = estimate_pair_data(clip.unstable, oracle, 1);
  REQUIRE(serial.flows.size() == clip.unstable.size() - 1);
  REQUIRE(serial.confs.size() == serial.flows.size());
  for (std::size_t k = 0; k < serial.flows.size(); ++k) {
    flow::OracleFlowProvider fresh(clip, flow::OracleFlowProvider::Stream::kUnstable);
    const flow::FlowResult want = fresh.estimate(clip.unstable[k + 1], clip.unstable[k],
                                                 static_cast<int>(k) + 1, static_cast<int>(k));
    CHECK(flows_equal(serial.flows[k], want.flow));
    CHECK(serial.confs[k].data == want.confidence.data);
  }

  const PairData parallel = estimate_pair_data(clip.unstable, oracle, 3);
  for (std::size_t k = 0; k < serial.flows.size(); ++k) {
    CHECK(flows_equal(parallel.flows[k], serial.flows[k]));
    CHECK(parallel.confs[k].data == serial.confs[k].data);
  }

  CHECK_THROWS_AS(estimate_pair_data({clip.unstable[0]}, oracle, 1), invalid_argument);
  std::vector<Frame> uneven = {clip.unstable[0], Frame(32, 24, 3)};
  CHECK_THROWS_AS(estimate_pair_data(uneven, oracle, 1), invalid_argument);
}

TEST_CASE("windowed pair masks follow the tiling rule") {
  const synth::SynthClip clip = small_clip(302, 9);
  flow::OracleFlowProvider oracle(clip, flow::OracleFlowProvider::Stream::kUnstable);
  const PairData pairs = estimate_pair_data(clip.unstable, oracle, 1);
  const int window = 4;
  const double delta_c = 0.5;

  const std::vector<BinaryMask> got =
      window_pair_masks(pairs.flows, pairs.confs, window, delta_c);
  REQUIRE(got.size() == pairs.flows.size());

  maskprop::MaskPropConfig mp;
  mp.delta_c = delta_c;
  std::size_t a = 0;
  while (a < pairs.flows.size()) {
    const std::size_t b = std::min(a + window - 1, pairs.flows.size());
    const std::vector<FlowField> wf(pairs.flows.begin() + a, pairs.flows.begin() + b);
    const std::vector<ConfidenceMap> wc(pairs.confs.begin() + a, pairs.confs.begin() + b);
    const std::vector<BinaryMask> want = maskprop::backprop_masks(wf, wc, mp);
    for (std::size_t i = 0; a + i < b; ++i) CHECK(got[a + i].data == want[i].data);
    a = b;
  }

  // A window wider than the clip degenerates to one global propagation.
  const std::vector<BinaryMask> wide =
      window_pair_masks(pairs.flows, pairs.confs, 64, delta_c);
  const std::vector<BinaryMask> whole = maskprop::backprop_masks(pairs.flows, pairs.confs, mp);
  for (std::size_t k = 0; k < wide.size(); ++k) CHECK(wide[k].data == whole[k].data);

  CHECK_THROWS_AS(window_pair_masks({}, {}, 4, 0.5), invalid_argument);
  CHECK_THROWS_AS(window_pair_masks(pairs.flows, pairs.confs, 1, 0.5), invalid_argument);
  std::vector<ConfidenceMap> short_confs(pairs.confs.begin(), pairs.confs.end() - 1);
  CHECK_THROWS_AS(window_pair_masks(pairs.flows, short_confs, 4, 0.5), invalid_argument);
}

TEST_CASE("stabilization composes its stages exactly") {
  const synth::SynthClip clip = small_clip(303, 10);
  flow::OracleFlowProvider oracle(clip, flow::OracleFlowProvider::Stream::kUnstable);
  PipelineConfig cfg;
  cfg.workers = 1;
  cfg.fine.iters = 0;  // keep the fine stage a no-op: exact wiring checks below

  const StabilizeResult res = stabilize_clip(clip.unstable, oracle, cfg);
  const std::size_t n = clip.unstable.size();
  REQUIRE(res.frames.size() == n);
  REQUIRE(res.pair_poses.size() == n - 1);
  REQUIRE(res.raw_trajectory.size() == n);
  REQUIRE(res.smooth_trajectory.size() == n);
  REQUIRE(res.aligns.size() == n);
  REQUIRE(res.warps.size() == n);
  CHECK(res.warnings.empty());

  // Oracle flow + exact similarity motion: the fitted pair poses match the
  // generator's frame-k -> frame-k+1 poses.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    CHECK(res.pair_poses[k].theta ==
          doctest::Approx(clip.gt_poses[k].theta).epsilon(1e-6));
    CHECK(res.pair_poses[k].s == doctest::Approx(clip.gt_poses[k].s).epsilon(1e-6));
    CHECK(res.pair_poses[k].dx == doctest::Approx(clip.gt_poses[k].dx).epsilon(1e-4));
    CHECK(res.pair_poses[k].dy == doctest::Approx(clip.gt_poses[k].dy).epsilon(1e-4));
  }

  CHECK(poses_equal(res.raw_trajectory, coarse::accumulate_trajectory(res.pair_poses)));
  CHECK(poses_equal(res.smooth_trajectory,
                    coarse::smooth_trajectory(res.raw_trajectory, cfg.smooth)));
  const std::vector<AlignMatrix> aligns = coarse::align_matrices(
      res.raw_trajectory, res.smooth_trajectory, clip.unstable[0].width,
      clip.unstable[0].height);
  for (std::size_t k = 0; k < n; ++k) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) CHECK(res.aligns[k].a[r][c] == aligns[k].a[r][c]);
    for (float v : res.warps[k].u) CHECK(v == 0.0f);
    for (float v : res.warps[k].v) CHECK(v == 0.0f);
    // With zero warp fields the output is exactly the aligned input.
    CHECK(frames_equal(res.frames[k],
                       coarse::apply_alignment(clip.unstable[k], res.aligns[k])));
  }

  // Same input, same config: bit-identical output.
  const StabilizeResult again = stabilize_clip(clip.unstable, oracle, cfg);
  for (std::size_t k = 0; k < n; ++k) CHECK(frames_equal(again.frames[k], res.frames[k]));
}

TEST_CASE("the fine stage engages on jittered clips and stays anchored") {
  const synth::SynthClip clip = small_clip(304, 8);
  flow::OracleFlowProvider oracle(clip, flow::OracleFlowProvider::Stream::kUnstable);
  PipelineConfig cfg;
  cfg.workers = 1;
  cfg.fine.iters = 40;
  cfg.fine_window = 5;

  const StabilizeResult res = stabilize_clip(clip.unstable, oracle, cfg);
  // Window boundary frames (0, 4, 7 for 7 pairs in windows [0,4],[4,7]) stay
  // pinned at zero; interior frames pick up non-trivial fields.
  for (float v : res.warps[0].u) CHECK(v == 0.0f);
  for (float v : res.warps[4].u) CHECK(v == 0.0f);
  for (float v : res.warps[7].u) CHECK(v == 0.0f);
  double moved = 0.0;
  for (std::size_t k = 0; k < res.warps.size(); ++k) {
    for (std::size_t p = 0; p < res.warps[k].u.size(); ++p) {
      moved += std::abs(res.warps[k].u[p]) + std::abs(res.warps[k].v[p]);
    }
  }
  CHECK(moved > 0.0);
}

TEST_CASE("stabilization falls back gracefully on degenerate support") {
  std::vector<Frame> frames;
  for (int k = 0; k < 3; ++k) frames.push_back(test_support::textured_frame(48, 36, 40 + k, 1));
  const AffinePose step{0.004, 1.001, 0.6, -0.4};
  PipelineConfig cfg;
  cfg.workers = 1;
  cfg.fine.iters = 0;
  cfg.fine_window = 2;  // disable the fine stage: this case is about pose fallbacks

  SUBCASE("zero confidence forces the all-valid-pixels fallback fit") {
    StubProvider p(step, 0.0f);
    const StabilizeResult res = stabilize_clip(frames, p, cfg);
    REQUIRE(res.warnings.size() == 2);
    CHECK(res.warnings[0].find("confidence mask unusable") != std::string::npos);
    for (const AffinePose& got : res.pair_poses) {
      CHECK(got.theta == doctest::Approx(step.theta).epsilon(1e-9));
      CHECK(got.dx == doctest::Approx(step.dx).epsilon(1e-9));
    }
  }

  SUBCASE("collinear validity degrades to identity poses with a warning") {
    for (Frame& f : frames) {
      f.valid = BinaryMask(f.width, f.height, false);
      for (int j = 0; j < f.width; ++j) f.valid.set(10, j, true);
    }
    StubProvider p(step, 1.0f);
    const StabilizeResult res = stabilize_clip(frames, p, cfg);
    REQUIRE(res.warnings.size() == 2);
    CHECK(res.warnings[0].find("pose fit degenerate") != std::string::npos);
    for (const AffinePose& got : res.pair_poses) {
      CHECK(got.theta == 0.0);
      CHECK(got.s == 1.0);
      CHECK(got.dx == 0.0);
    }
  }
}

TEST_CASE("outpainting a single frame falls back to hole filling") {
  Frame frame = test_support::textured_frame(64, 48, 77, 3);
  const Frame full = frame;
  frame.valid = BinaryMask(64, 48, false);
  for (int i = 6; i < 42; ++i)
    for (int j = 8; j < 56; ++j) frame.valid.set(i, j, true);

  flow::ClassicalFlowProvider provider;
  PipelineConfig cfg;
  const OutpaintClipResult res = outpaint_clip({frame}, provider, cfg);
  REQUIRE(res.frames.size() == 1);
  CHECK(res.decisions[0].empty());
  CHECK(res.frames[0].valid.count() == std::size_t(64) * 48);
  for (int i = 6; i < 42; ++i)
    for (int j = 8; j < 56; ++j)
      for (int c = 0; c < 3; ++c) CHECK(res.frames[0].at(i, j, c) == full.at(i, j, c));

  CHECK_THROWS_AS(outpaint_clip({}, provider, cfg), invalid_argument);
}

TEST_CASE("clip outpainting completes every frame and keeps original pixels") {
  // Steady camera pan rendered at full FOV, then cropped to a narrower
  // validity box: the neighbors genuinely contain the missing margins.
  synth::SynthConfig scfg;
  scfg.n_frames = 6;
  scfg.crop_width = 96;
  scfg.crop_height = 72;
  scfg.theta_max_deg = 0.5;
  scfg.s_min = 1.0;
  scfg.s_max = 1.0;
  scfg.t_max_x = 18.0;
  scfg.t_max_y = 8.0;
  scfg.p_max_x = 0.0;
  scfg.p_max_y = 0.0;
  scfg.n_objects_max = 0;
  scfg.rng_seed = 55;
  int bw = 0, bh = 0;
  synth::required_base_dims(scfg, bw, bh);
  const synth::SynthClip clip =
      synth::gen_stable_video(synth::make_base_image(bw, bh, 55), scfg);

  std::vector<Frame> cropped = clip.stable;
  for (Frame& f : cropped) {
    BinaryMask box(f.width, f.height, false);
    for (int i = 5; i < f.height - 5; ++i)
      for (int j = 7; j < f.width - 7; ++j) box.set(i, j, true);
    for (std::size_t p = 0; p < box.data.size(); ++p) {
      f.valid.data[p] = f.valid.data[p] && box.data[p];
    }
  }

  flow::ClassicalFlowProvider provider;
  PipelineConfig cfg;
  cfg.outpaint_neighbors = 2;
  const OutpaintClipResult res = outpaint_clip(cropped, provider, cfg);
  REQUIRE(res.frames.size() == cropped.size());
  for (std::size_t k = 0; k < res.frames.size(); ++k) {
    CHECK(res.frames[k].valid.count() ==
          std::size_t(res.frames[k].width) * res.frames[k].height);
    for (int i = 0; i < cropped[k].height; ++i)
      for (int j = 0; j < cropped[k].width; ++j) {
        if (!cropped[k].valid.at(i, j)) continue;
        for (int c = 0; c < cropped[k].channels; ++c) {
          CHECK(res.frames[k].at(i, j, c) == cropped[k].at(i, j, c));
        }
      }
    CHECK(res.decisions[k].size() <= 4);
  }
  CHECK(eval::cropping_ratio(cropped, res.frames) == 1.0);
}

TEST_CASE("the full pipeline leaves no cropped pixels behind") {
  const synth::SynthClip clip = small_clip(305, 8, 6.0);
  flow::OracleFlowProvider oracle(clip, flow::OracleFlowProvider::Stream::kUnstable);
  PipelineConfig cfg;
  cfg.workers = 1;
  cfg.fine.iters = 10;
  cfg.outpaint_neighbors = 1;

  const PipelineRunResult run = run_pipeline(clip.unstable, oracle, cfg);
  REQUIRE(run.stab.frames.size() == clip.unstable.size());
  REQUIRE(run.outp.frames.size() == clip.unstable.size());
  CHECK(eval::cropping_ratio(clip.unstable, run.outp.frames) == 1.0);
}

TEST_CASE("metric reports assemble the expected numbers") {
  std::vector<Frame> in(4, test_support::textured_frame(32, 24, 9, 1));

  SUBCASE("identity run scores perfect and omits stability") {
    const MetricsReport r = compute_metrics(in, in, {});
    CHECK(r.cropping_ratio == 1.0);
    CHECK(r.distortion_value == 1.0);
    CHECK_FALSE(r.stability.has_value());
    REQUIRE(r.frame_valid_fraction.size() == 4);
    for (double v : r.frame_valid_fraction) CHECK(v == 1.0);
    for (double v : r.frame_distortion) CHECK(v == 1.0);
  }

  SUBCASE("cropping and distortion flow through from the sequences and maps") {
    std::vector<Frame> out = in;
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 32; ++j) out[2].valid.set(i, j, j < 16);
    std::vector<AlignMatrix> maps(4);
    maps[1].a = {{{2.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
    const MetricsReport r = compute_metrics(in, out, maps);
    CHECK(r.cropping_ratio == doctest::Approx((3.0 + 0.5) / 4.0).epsilon(1e-12));
    CHECK(r.frame_valid_fraction[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.distortion_value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.frame_distortion[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.frame_distortion[0] == 1.0);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(compute_metrics({}, {}, {}), invalid_argument);
    CHECK_THROWS_AS(compute_metrics(in, in, std::vector<AlignMatrix>(2)), invalid_argument);
  }
}

TEST_CASE("long sequences get a measured stability score") {
  synth::SynthConfig cfg;
  cfg.n_frames = 34;
  cfg.crop_width = 64;
  cfg.crop_height = 48;
  cfg.n_objects_max = 0;
  cfg.rng_seed = 21;
  int bw = 0, bh = 0;
  synth::required_base_dims(cfg, bw, bh);
  const synth::SynthClip clip =
      synth::gen_stable_video(synth::make_base_image(bw, bh, 21), cfg);
  const MetricsReport r = compute_metrics(clip.stable, clip.stable, {});
  REQUIRE(r.stability.has_value());
  CHECK(*r.stability >= 0.0);
  CHECK(*r.stability <= 1.0);
}

TEST_CASE("report writers emit the documented formats") {
  TempDir tmp;
  MetricsReport r;
  r.cropping_ratio = 0.875;
  r.distortion_value = 0.5;
  r.stability = 0.25;
  r.frame_valid_fraction = {1.0, 0.75};
  r.frame_distortion = {1.0, 0.5};

  write_metrics_csv(tmp.file("m.csv"), r);
  const std::string csv = slurp(tmp.file("m.csv"));
  CHECK(csv.find("metric,value") != std::string::npos);
  CHECK(csv.find("cropping_ratio,0.875") != std::string::npos);
  CHECK(csv.find("frame,valid_fraction,distortion") != std::string::npos);
  CHECK(csv.find("1,0.75,0.5") != std::string::npos);

  write_metrics_text(tmp.file("m.txt"), r);
  const std::string txt = slurp(tmp.file("m.txt"));
  CHECK(txt.find("cropping ratio   0.8750") != std::string::npos);
  CHECK(txt.find("stability score  0.2500") != std::string::npos);
  r.stability.reset();
  write_metrics_text(tmp.file("m2.txt"), r);
  CHECK(slurp(tmp.file("m2.txt")).find("n/a") != std::string::npos);

  eval::FixedPointTrace trace;
  trace.mean_flow = {3.0, 1.0, 0.5};
  trace.max_theta = {0.02, 0.01, 0.005};
  trace.max_scale_dev = {0.01, 0.004, 0.002};
  trace.max_translation = {4.0, 1.5, 0.7};
  write_trace_csv(tmp.file("t.csv"), trace);
  const std::string tcsv = slurp(tmp.file("t.csv"));
  CHECK(tcsv.find("iteration,mean_flow,max_theta,max_scale_dev,max_translation") !=
        std::string::npos);
  CHECK(tcsv.find("\n2,0.5,") != std::string::npos);

  write_trace_svg(tmp.file("t.svg"), trace);
  const std::string svg = slurp(tmp.file("t.svg"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("mean flow magnitude") != std::string::npos);

  std::vector<std::vector<outpaint::FuseDecision>> decisions(2);
  outpaint::FuseDecision d;
  d.area_stable = 120;
  d.area_unstable = 80;
  d.ratio = 80.0 / 121.0;
  d.accepted = true;
  decisions[1].push_back(d);
  write_fusion_table(tmp.file("f.txt"), decisions);
  const std::string ftxt = slurp(tmp.file("f.txt"));
  CHECK(ftxt.find("# target candidate") != std::string::npos);
  CHECK(ftxt.find("1 0 120 80") != std::string::npos);
  CHECK(ftxt.find("yes") != std::string::npos);

  const std::vector<std::int8_t> labels = {-1, 0, 1, 2, -1, 0};
  write_labels_pgm(tmp.file("l.pgm"), labels, 3, 2);
  const std::string pgm = slurp(tmp.file("l.pgm"));
  CHECK(pgm.substr(0, 3) == "P5\n");
  CHECK(pgm.find("3 2") != std::string::npos);
  CHECK(pgm.size() >= 6);
  CHECK(static_cast<unsigned char>(pgm[pgm.size() - 6]) == 64);
  CHECK(static_cast<unsigned char>(pgm[pgm.size() - 3]) == 255);
  CHECK_THROWS_AS(write_labels_pgm(tmp.file("bad.pgm"), labels, 4, 2), invalid_argument);

  CHECK_THROWS_AS(write_metrics_csv("/nonexistent-dir/x.csv", r), io_error);
}
