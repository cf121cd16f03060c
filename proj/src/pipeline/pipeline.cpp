// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ffstab/coarse/pose_solver.hpp"
#include "ffstab/coarse/trajectory.hpp"
#include "ffstab/core/error.hpp"
#include "ffstab/core/parallel.hpp"
#include "ffstab/core/warp.hpp"
#include "ffstab/fine/warp_solver.hpp"
#include "ffstab/maskprop/maskprop.hpp"

namespace ffstab::pipeline {

namespace {

void check_uniform(const std::vector<Frame>& frames, const char* who) {
  if (frames.size() < 2) {
    throw invalid_argument(std::string(who) + ": need at least 2 frames");
  }
  for (const Frame& f : frames) {
    if (f.width != frames[0].width || f.height != frames[0].height ||
        f.channels != frames[0].channels) {
      throw invalid_argument(std::string(who) + ": frames must share one size");
    }
  }
}

BinaryMask conf_mask(const ConfidenceMap& conf, const BinaryMask& valid, double delta_c) {
  BinaryMask m = maskprop::binarize(conf, delta_c);
  for (std::size_t p = 0; p < m.data.size(); ++p) {
    m.data[p] = m.data[p] && valid.data[p];
  }
  return m;
}

// Centered crop-window mask (crop_ratio of each dimension).
BinaryMask crop_window(int width, int height, double ratio) {
  BinaryMask m(width, height);
  const int cw = std::max(1, static_cast<int>(std::lround(width * ratio)));
  const int ch = std::max(1, static_cast<int>(std::lround(height * ratio)));
  const int x0 = (width - cw) / 2, y0 = (height - ch) / 2;
  for (int i = y0; i < y0 + ch; ++i) {
    for (int j = x0; j < x0 + cw; ++j) m.set(i, j, true);
  }
  return m;
}

Frame masked_copy(const Frame& f, const BinaryMask& keep) {
  Frame out = f;
  for (std::size_t p = 0; p < out.valid.data.size(); ++p) {
    out.valid.data[p] = f.valid.data[p] && keep.data[p];
  }
  return out;
}

}  // namespace

PairData estimate_pair_data(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                            int workers) {
  check_uniform(frames, "estimate_pair_data");
  const std::size_t pairs = frames.size() - 1;
  PairData out;
  out.flows.assign(pairs, FlowField());
  out.confs.assign(pairs, ConfidenceMap());
  parallel_for(0, static_cast<int>(pairs), workers, [&](int k) {
    flow::FlowResult r = provider.estimate(frames[k + 1], frames[k], k + 1, k);
    out.flows[k] = std::move(r.flow);
    out.confs[k] = std::move(r.confidence);
  });
  return out;
}

std::vector<BinaryMask> window_pair_masks(const std::vector<FlowField>& flows,
                                          const std::vector<ConfidenceMap>& confs,
                                          int window_frames, double delta_c) {
  if (flows.empty() || flows.size() != confs.size()) {
    throw invalid_argument("window_pair_masks: flows and confidences must be non-empty and match");
  }
  if (window_frames < 2) throw invalid_argument("window_pair_masks: window must cover >= 2 frames");
  const std::size_t pairs = flows.size();
  std::vector<BinaryMask> out(pairs);
  maskprop::MaskPropConfig mp;
  mp.delta_c = delta_c;
  std::size_t a = 0;
  while (a < pairs) {
    const std::size_t b = std::min(a + static_cast<std::size_t>(window_frames) - 1, pairs);
    const std::vector<FlowField> wf(flows.begin() + a, flows.begin() + b);
    const std::vector<ConfidenceMap> wc(confs.begin() + a, confs.begin() + b);
    const std::vector<BinaryMask> masks = maskprop::backprop_masks(wf, wc, mp);
    for (std::size_t i = 0; i + a < b; ++i) out[a + i] = masks[i];
    a = b;
  }
  return out;
}

StabilizeResult stabilize_with_flows(const std::vector<Frame>& frames, const PairData& pairs,
                                     const PipelineConfig& cfg) {
  check_uniform(frames, "stabilize_with_flows");
  const std::size_t n_pairs = frames.size() - 1;
  if (pairs.flows.size() != n_pairs || pairs.confs.size() != n_pairs) {
    throw invalid_argument("stabilize_with_flows: pair data count mismatch");
  }
  const int w = frames[0].width, h = frames[0].height;

  StabilizeResult res;
  res.pair_poses.resize(n_pairs);

  // Coarse stage: robust similarity per pair on confidence-masked pixels.
  for (std::size_t k = 0; k < n_pairs; ++k) {
    BinaryMask mask = conf_mask(pairs.confs[k], frames[k].valid, cfg.maskprop.delta_c);
    bool solved = false;
    if (mask.count() >= 16) {
      try {
        res.pair_poses[k] = coarse::solve_pose(pairs.flows[k], mask, cfg.pose);
        solved = true;
      } catch (const numeric_error&) {
      }
    }
    if (!solved) {
      try {
        res.pair_poses[k] = coarse::solve_pose(pairs.flows[k], frames[k].valid, cfg.pose);
        solved = true;
        res.warnings.push_back("pair " + std::to_string(k) +
                               ": confidence mask unusable, pose fitted on all valid pixels");
      } catch (const numeric_error&) {
        res.pair_poses[k] = AffinePose{};
        res.warnings.push_back("pair " + std::to_string(k) +
                               ": pose fit degenerate, using identity");
      }
    }
  }

  res.raw_trajectory = coarse::accumulate_trajectory(res.pair_poses);
  res.smooth_trajectory = coarse::smooth_trajectory(res.raw_trajectory, cfg.smooth);
  res.aligns = coarse::align_matrices(res.raw_trajectory, res.smooth_trajectory, w, h);

  // Fine stage: residual warp fields over tiled windows; boundary frames of
  // each window stay pinned to zero, which keeps the tiling seamless.
  res.warps.assign(frames.size(), FlowField(w, h));
  if (cfg.fine_window >= 3 && frames.size() >= 3) {
    const std::vector<BinaryMask> pair_masks =
        window_pair_masks(pairs.flows, pairs.confs, cfg.fine_window, cfg.maskprop.delta_c);
    std::size_t a = 0;
    while (a < n_pairs) {
      const std::size_t b = std::min(a + static_cast<std::size_t>(cfg.fine_window) - 1, n_pairs);
      const std::size_t len = b - a;  // pairs in this window
      if (len >= 2) {
        std::vector<FlowField> residuals;
        std::vector<BinaryMask> masks;
        residuals.reserve(len);
        masks.reserve(len);
        for (std::size_t k = a; k < b; ++k) {
          residuals.push_back(
              fine::residual_pair_flow(res.aligns[k], res.aligns[k + 1], pairs.flows[k]));
          BinaryMask m = pair_masks[k];
          for (std::size_t p = 0; p < m.data.size(); ++p) {
            m.data[p] = m.data[p] && frames[k].valid.data[p];
          }
          masks.push_back(std::move(m));
        }
        fine::WarpSolveResult sol = fine::solve_warp_fields(residuals, masks, cfg.fine);
        if (sol.empty_masks) {
          res.warnings.push_back("fine window at frame " + std::to_string(a) +
                                 ": all masks empty, warp fields left at zero");
        }
        for (std::size_t i = 1; i < len; ++i) res.warps[a + i] = std::move(sol.fields[i]);
      }
      a = b;
    }
  }

  res.frames = fine::apply_warps(frames, res.aligns, res.warps);
  return res;
}

StabilizeResult stabilize_clip(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                               const PipelineConfig& cfg) {
  return stabilize_with_flows(frames, estimate_pair_data(frames, provider, cfg.workers), cfg);
}

OutpaintClipResult outpaint_clip(const std::vector<Frame>& stabilized,
                                 flow::FlowProvider& primary, const PipelineConfig& cfg) {
  if (stabilized.empty()) throw invalid_argument("outpaint_clip: no frames");
  const int w = stabilized[0].width, h = stabilized[0].height;
  for (const Frame& f : stabilized) {
    if (f.width != w || f.height != h) {
      throw invalid_argument("outpaint_clip: frames must share one size");
    }
  }
  const int t_count = static_cast<int>(stabilized.size());
  flow::ClassicalFlowProvider realign;

  OutpaintClipResult res;
  res.frames.resize(t_count);
  res.decisions.resize(t_count);
  const BinaryMask window = crop_window(w, h, cfg.outpaint.crop_ratio);

  for (int t = 0; t < t_count; ++t) {
    const Frame& target = stabilized[t];
    std::vector<outpaint::FusionCandidate> candidates;

    for (int off = -cfg.outpaint_neighbors; off <= cfg.outpaint_neighbors; ++off) {
      const int s = t + off;
      if (off == 0 || s < 0 || s >= t_count) continue;

      // Flow from the target grid into the neighbor, extended into margins.
      flow::FlowResult fr = primary.estimate(stabilized[s], target, s, t);
      BinaryMask fm = conf_mask(fr.confidence, target.valid, cfg.maskprop.delta_c);
      if (fm.count() < 16) {
        res.warnings.push_back("frame " + std::to_string(t) + " neighbor " + std::to_string(s) +
                               ": no reliable flow, candidate skipped");
        continue;
      }
      const FlowField y_large = outpaint::outpaint_flow(fr.flow, fm);
      const Frame warped = warp_frame(stabilized[s], y_large);

      // Cropped re-alignment: estimate the remaining misalignment on the
      // central crop, extend it outward, and re-warp the full candidate.
      const Frame crop_t = masked_copy(target, window);
      const Frame crop_s = masked_copy(warped, window);
      Frame candidate = warped;
      flow::FlowResult rr = realign.estimate(crop_s, crop_t, -1, -1);
      BinaryMask rm = conf_mask(rr.confidence, crop_t.valid, cfg.maskprop.delta_c);
      if (rm.count() >= 16) {
        const FlowField y_re = outpaint::outpaint_flow(rr.flow, rm);
        candidate = warp_frame(warped, y_re);
      } else {
        res.warnings.push_back("frame " + std::to_string(t) + " neighbor " + std::to_string(s) +
                               ": re-alignment skipped (no reliable crop flow)");
      }

      const outpaint::OutpaintMaskResult omr = outpaint::outpaint_mask(
          target, crop_t, candidate, target.valid, crop_t.valid, cfg.outpaint);
      outpaint::FusionCandidate fc;
      fc.result = outpaint::fuse_margin(target, candidate, omr.mask);
      fc.fill_mask = candidate.valid;
      double a_s = 0.0, a_u = 0.0;
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          if (candidate.valid.at(i, j) && !target.valid.at(i, j)) a_s += 1.0;
        }
      }
      for (const std::int8_t lab : omr.labels) a_u += lab == -1 ? 1.0 : 0.0;
      fc.area_stable = a_s;
      fc.area_unstable = a_u;
      candidates.push_back(std::move(fc));
    }

    outpaint::MultiFuseResult fused = outpaint::multi_frame_fuse(target, candidates, cfg.outpaint);
    res.decisions[t] = std::move(fused.decisions);
    if (fused.fused.valid.count() == 0) {
      // Degenerate input (fully invalid frame): nothing to fill from.
      res.frames[t] = fused.fused;
      res.warnings.push_back("frame " + std::to_string(t) + ": no valid content to fill from");
      continue;
    }
    res.frames[t] = outpaint::fill_holes(fused.fused);
  }
  return res;
}

PipelineRunResult run_pipeline(const std::vector<Frame>& frames, flow::FlowProvider& provider,
                               const PipelineConfig& cfg) {
  PipelineRunResult out;
  out.stab = stabilize_clip(frames, provider, cfg);
  flow::ClassicalFlowProvider post;  // stabilized content invalidates analytic transforms
  out.outp = outpaint_clip(out.stab.frames, post, cfg);
  return out;
}

}  // namespace ffstab::pipeline
