// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synthetic clip generation, flow estimation,
// two-stage stabilization, full-frame outpainting, metric evaluation, and the
// re-stabilization convergence harness.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 I/O failure,
// 3 numerical failure. Errors are reported as a single machine-readable
// stderr line: ffstab: error kind=<config|io|numeric> msg="...".

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffstab/coarse/trajectory.hpp"
#include "ffstab/core/error.hpp"
#include "ffstab/core/parallel.hpp"
#include "ffstab/core/types.hpp"
#include "ffstab/eval/fixed_point.hpp"
#include "ffstab/eval/metrics.hpp"
#include "ffstab/flow/provider.hpp"
#include "ffstab/io/flow_io.hpp"
#include "ffstab/io/image_io.hpp"
#include "ffstab/pipeline/config.hpp"
#include "ffstab/pipeline/pipeline.hpp"
#include "ffstab/pipeline/report.hpp"
#include "ffstab/synth/synth.hpp"

namespace fs = std::filesystem;
using namespace ffstab;

namespace {

std::string seq_path(const std::string& dir, std::size_t k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "/%05zu.%s", k, ext);
  return dir + buf;
}

struct LoadedInput {
  std::vector<Frame> frames;
  std::unique_ptr<synth::SynthClip> clip;  // set when the directory is a synthetic clip
};

// Accepts either a synthetic clip directory (gt.txt present; the unstable
// stream is used when it exists) or a plain frame directory: PNG frames in
// dir/frames/ (falling back to dir itself), with optional validity masks in
// dir/masks/ matched by index.
LoadedInput load_input(const std::string& dir) {
  LoadedInput in;
  if (fs::exists(fs::path(dir) / "gt.txt")) {
    in.clip = std::make_unique<synth::SynthClip>(synth::load_clip(dir));
    in.frames = in.clip->unstable.empty() ? in.clip->stable : in.clip->unstable;
    return in;
  }
  std::string frame_dir = dir;
  if (fs::is_directory(fs::path(dir) / "frames")) frame_dir = (fs::path(dir) / "frames").string();
  if (!fs::is_directory(frame_dir)) throw io_error("not a directory: " + frame_dir);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(frame_dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext == ".png" || ext == ".ppm") names.push_back(e.path().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw io_error("no frames (*.png, *.ppm) found in " + frame_dir);
  const std::string mask_dir = (fs::path(dir) / "masks").string();
  const bool has_masks = fs::is_directory(mask_dir);
  for (std::size_t k = 0; k < names.size(); ++k) {
    Frame f = read_image(names[k]);
    if (has_masks) {
      const std::string mp = seq_path(mask_dir, k, "pgm");
      if (fs::exists(mp)) {
        BinaryMask m = read_mask_pgm(mp);
        if (m.width != f.width || m.height != f.height) {
          throw format_error("mask size mismatch: " + mp);
        }
        f.valid = std::move(m);
      }
    }
    in.frames.push_back(std::move(f));
  }
  return in;
}

std::unique_ptr<flow::FlowProvider> make_provider(const pipeline::PipelineConfig& cfg,
                                                  const LoadedInput& in) {
  if (cfg.provider == pipeline::Provider::kOracle) {
    if (!in.clip) {
      throw invalid_argument(
          "provider=oracle needs a synthetic clip directory (gt.txt with transforms)");
    }
    const auto stream = in.clip->unstable.empty() ? flow::OracleFlowProvider::Stream::kStable
                                                  : flow::OracleFlowProvider::Stream::kUnstable;
    return std::make_unique<flow::OracleFlowProvider>(*in.clip, stream);
  }
  return std::make_unique<flow::ClassicalFlowProvider>();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory: " + dir + " (" + ec.message() + ")");
}

void write_frames(const std::string& dir, const std::vector<Frame>& frames, bool with_masks) {
  ensure_dir(dir + "/frames");
  if (with_masks) ensure_dir(dir + "/masks");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    write_image(seq_path(dir + "/frames", k, "png"), frames[k]);
    if (with_masks) write_mask_pgm(seq_path(dir + "/masks", k, "pgm"), frames[k].valid);
  }
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "ffstab: warning " << w << "\n";
}

std::vector<AlignMatrix> effective_maps(const pipeline::StabilizeResult& sr) {
  std::vector<AlignMatrix> maps;
  maps.reserve(sr.aligns.size());
  for (std::size_t k = 0; k < sr.aligns.size(); ++k) {
    if (k < sr.warps.size() && sr.warps[k].width > 0) {
      maps.push_back(eval::transform_from_warp(sr.aligns[k], sr.warps[k]));
    } else {
      maps.push_back(sr.aligns[k]);
    }
  }
  return maps;
}

void write_stab_artifacts(const std::string& out_dir, const std::vector<Frame>& input,
                          const pipeline::StabilizeResult& sr) {
  write_frames(out_dir, sr.frames, /*with_masks=*/true);
  ensure_dir(out_dir + "/warp");
  for (std::size_t k = 0; k < sr.warps.size(); ++k) {
    if (sr.warps[k].width > 0) write_flo(seq_path(out_dir + "/warp", k, "flo"), sr.warps[k]);
  }
  coarse::write_trajectory(out_dir + "/trajectory.txt", sr.raw_trajectory, sr.smooth_trajectory);
  const pipeline::MetricsReport rep =
      pipeline::compute_metrics(input, sr.frames, effective_maps(sr));
  pipeline::write_metrics_csv(out_dir + "/metrics.csv", rep);
  pipeline::write_metrics_text(out_dir + "/metrics.txt", rep);
}

void write_psnr_ssim_csv(const std::string& path, const std::vector<Frame>& a,
                         const std::vector<Frame>& b) {
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].width != b[k].width || a[k].height != b[k].height ||
        a[k].channels != b[k].channels) {
      continue;
    }
    BinaryMask region(a[k].width, a[k].height);
    bool any = false;
    for (std::size_t p = 0; p < region.data.size(); ++p) {
      region.data[p] = a[k].valid.data[p] && b[k].valid.data[p];
      any = any || region.data[p];
    }
    if (!any) continue;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, eval::psnr(a[k], b[k], &region),
                  eval::ssim(a[k], b[k], &region));
    rows.push_back(buf);
  }
  std::ofstream out(path);
  if (!out.is_open()) throw io_error("cannot open for writing: " + path);
  out << "frame,psnr_db,ssim\n";
  for (const std::string& r : rows) out << r;
  out.flush();
  if (!out.good()) throw io_error("write failed: " + path);
}

int cmd_synth(const std::string& out_dir, const pipeline::PipelineConfig& cfg) {
  int bw = 0;
  int bh = 0;
  synth::required_base_dims(cfg.synth, bw, bh);
  const Frame base = synth::make_base_image(bw, bh, cfg.synth.rng_seed);
  synth::SynthClip clip = synth::gen_stable_video(base, cfg.synth);
  synth::jitter_video(clip);
  if (cfg.synth.n_objects_max > 0) synth::insert_movers(clip);
  ensure_dir(out_dir);
  synth::store_clip(out_dir, clip);
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "synth: " << clip.stable.size() << " frames (" << cfg.synth.crop_width << "x"
            << cfg.synth.crop_height << ") -> " << out_dir << "\n";
  return 0;
}

int cmd_flow(const std::string& in_dir, const std::string& out_dir,
             const pipeline::PipelineConfig& cfg) {
  const LoadedInput in = load_input(in_dir);
  if (in.frames.size() < 2) throw invalid_argument("flow needs at least 2 frames");
  auto provider = make_provider(cfg, in);
  const pipeline::PairData pd =
      pipeline::estimate_pair_data(in.frames, *provider, resolve_workers(cfg.workers));
  ensure_dir(out_dir + "/flow");
  ensure_dir(out_dir + "/conf");
  for (std::size_t k = 0; k < pd.flows.size(); ++k) {
    write_flo(seq_path(out_dir + "/flow", k, "flo"), pd.flows[k]);
    write_confidence_pgm(seq_path(out_dir + "/conf", k, "pgm"), pd.confs[k]);
  }
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "flow: " << pd.flows.size() << " pair fields -> " << out_dir << "\n";
  return 0;
}

int cmd_stabilize(const std::string& in_dir, const std::string& out_dir,
                  const pipeline::PipelineConfig& cfg) {
  const LoadedInput in = load_input(in_dir);
  auto provider = make_provider(cfg, in);
  const pipeline::StabilizeResult sr = pipeline::stabilize_clip(in.frames, *provider, cfg);
  print_warnings(sr.warnings);
  ensure_dir(out_dir);
  write_stab_artifacts(out_dir, in.frames, sr);
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "stabilize: " << sr.frames.size() << " frames -> " << out_dir << " ("
            << sr.warnings.size() << " warnings)\n";
  return 0;
}

int cmd_outpaint(const std::string& in_dir, const std::string& out_dir,
                 const pipeline::PipelineConfig& cfg) {
  const LoadedInput in = load_input(in_dir);
  if (in.frames.size() < 2) throw invalid_argument("outpaint needs at least 2 frames");
  flow::ClassicalFlowProvider primary;
  const pipeline::OutpaintClipResult res = pipeline::outpaint_clip(in.frames, primary, cfg);
  print_warnings(res.warnings);
  ensure_dir(out_dir);
  write_frames(out_dir, res.frames, /*with_masks=*/true);
  pipeline::write_fusion_table(out_dir + "/fusion.txt", res.decisions);
  const pipeline::MetricsReport rep = pipeline::compute_metrics(in.frames, res.frames, {});
  pipeline::write_metrics_csv(out_dir + "/metrics.csv", rep);
  pipeline::write_metrics_text(out_dir + "/metrics.txt", rep);
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "outpaint: " << res.frames.size() << " frames -> " << out_dir
            << " (cropping ratio " << rep.cropping_ratio << ")\n";
  return 0;
}

int cmd_eval(const std::string& in_dir, const std::string& out_dir, const std::string& report_dir,
             const pipeline::PipelineConfig& cfg) {
  (void)cfg;
  const LoadedInput a = load_input(in_dir);
  const LoadedInput b = load_input(out_dir);
  if (a.frames.size() != b.frames.size() || a.frames.empty()) {
    throw invalid_argument("eval: sequences must be non-empty and the same length");
  }
  ensure_dir(report_dir);
  const pipeline::MetricsReport rep = pipeline::compute_metrics(a.frames, b.frames, {});
  pipeline::write_metrics_csv(report_dir + "/metrics.csv", rep);
  pipeline::write_metrics_text(report_dir + "/metrics.txt", rep);
  write_psnr_ssim_csv(report_dir + "/psnr_ssim.csv", a.frames, b.frames);
  std::cout << "eval: cropping " << rep.cropping_ratio << ", distortion " << rep.distortion_value;
  if (rep.stability) std::cout << ", stability " << *rep.stability;
  std::cout << " -> " << report_dir << "\n";
  return 0;
}

int cmd_fixpoint(const std::string& in_dir, const std::string& out_dir,
                 const pipeline::PipelineConfig& cfg) {
  const LoadedInput in = load_input(in_dir);
  const eval::FixedPointTrace trace = eval::fixed_point_run(in.frames, cfg.fixpoint_iters, cfg);
  ensure_dir(out_dir);
  pipeline::write_trace_csv(out_dir + "/trace.csv", trace);
  pipeline::write_trace_svg(out_dir + "/trace.svg", trace);
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "fixpoint: " << cfg.fixpoint_iters << " iterations, mean flow "
            << trace.mean_flow.front() << " -> " << trace.mean_flow.back() << " px, results in "
            << out_dir << "\n";
  return 0;
}

int cmd_pipeline(const std::string& in_dir, const std::string& out_dir,
                 const pipeline::PipelineConfig& cfg) {
  const LoadedInput in = load_input(in_dir);
  auto provider = make_provider(cfg, in);
  const pipeline::PipelineRunResult res = pipeline::run_pipeline(in.frames, *provider, cfg);
  print_warnings(res.stab.warnings);
  print_warnings(res.outp.warnings);
  ensure_dir(out_dir);
  write_stab_artifacts(out_dir + "/stab", in.frames, res.stab);
  write_frames(out_dir, res.outp.frames, /*with_masks=*/true);
  pipeline::write_fusion_table(out_dir + "/fusion.txt", res.outp.decisions);
  const pipeline::MetricsReport rep =
      pipeline::compute_metrics(in.frames, res.outp.frames, effective_maps(res.stab));
  pipeline::write_metrics_csv(out_dir + "/metrics.csv", rep);
  pipeline::write_metrics_text(out_dir + "/metrics.txt", rep);
  pipeline::write_config(out_dir + "/config.txt", cfg);
  std::cout << "pipeline: " << res.outp.frames.size() << " frames -> " << out_dir
            << " (cropping ratio " << rep.cropping_ratio << ")\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"full-frame video stabilizer"};
  app.require_subcommand(1);
  app.fallthrough();  // lets global flags appear after the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = -1;
  std::string provider;
  bool literal_alg3 = false;
  app.add_option("--config", config_path, "flat-text config file");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--workers", workers, "worker thread count (0 = auto)");
  app.add_option("--provider", provider, "flow provider: oracle or classical");
  app.add_flag("--literal-alg3", literal_alg3,
               "use the strict greater-than reading of the fusion ratio gate");

  std::string in_dir, out_dir, report_dir;
  int iters = 0;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic clip");
  synth_cmd->add_option("out_dir", out_dir)->required();
  auto* flow_cmd = app.add_subcommand("flow", "estimate adjacent-pair flow fields");
  flow_cmd->add_option("in_dir", in_dir)->required();
  flow_cmd->add_option("out_dir", out_dir)->required();
  auto* stab_cmd = app.add_subcommand("stabilize", "two-stage stabilization");
  stab_cmd->add_option("in_dir", in_dir)->required();
  stab_cmd->add_option("out_dir", out_dir)->required();
  auto* outp_cmd = app.add_subcommand("outpaint", "full-frame rendering of a stabilized clip");
  outp_cmd->add_option("in_dir", in_dir)->required();
  outp_cmd->add_option("out_dir", out_dir)->required();
  auto* eval_cmd = app.add_subcommand("eval", "quality metrics for an input/output pair");
  eval_cmd->add_option("in_dir", in_dir)->required();
  eval_cmd->add_option("out_dir", out_dir)->required();
  eval_cmd->add_option("report_dir", report_dir)->required();
  auto* fix_cmd = app.add_subcommand("fixpoint", "repeated re-stabilization trace");
  fix_cmd->add_option("in_dir", in_dir)->required();
  fix_cmd->add_option("out_dir", out_dir)->required();
  auto* iters_opt = fix_cmd->add_option("--iters", iters, "number of re-stabilization passes");
  auto* pipe_cmd = app.add_subcommand("pipeline", "stabilize + outpaint in one run");
  pipe_cmd->add_option("in_dir", in_dir)->required();
  pipe_cmd->add_option("out_dir", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  pipeline::PipelineConfig cfg;
  if (!config_path.empty()) cfg = pipeline::parse_config(config_path);
  if (seed_opt->count() > 0) {
    cfg.seed = seed;
    cfg.synth.rng_seed = seed;
  }
  if (workers >= 0) cfg.workers = workers;
  if (!provider.empty()) cfg.provider = pipeline::provider_from_name(provider);
  if (literal_alg3) cfg.outpaint.literal_alg3 = true;
  if (iters_opt->count() > 0) {
    if (iters < 1) throw invalid_argument("--iters must be >= 1");
    cfg.fixpoint_iters = iters;
  }

  if (synth_cmd->parsed()) return cmd_synth(out_dir, cfg);
  if (flow_cmd->parsed()) return cmd_flow(in_dir, out_dir, cfg);
  if (stab_cmd->parsed()) return cmd_stabilize(in_dir, out_dir, cfg);
  if (outp_cmd->parsed()) return cmd_outpaint(in_dir, out_dir, cfg);
  if (eval_cmd->parsed()) return cmd_eval(in_dir, out_dir, report_dir, cfg);
  if (fix_cmd->parsed()) return cmd_fixpoint(in_dir, out_dir, cfg);
  if (pipe_cmd->parsed()) return cmd_pipeline(in_dir, out_dir, cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const format_error& e) {
    std::cerr << "ffstab: error kind=io msg=\"" << e.what() << "\"\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "ffstab: error kind=io msg=\"" << e.what() << "\"\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "ffstab: error kind=numeric msg=\"" << e.what() << "\"\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ffstab: error kind=config msg=\"" << e.what() << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ffstab: error kind=config msg=\"" << e.what() << "\"\n";
    return 1;
  }
}
