// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/eval/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ffstab/coarse/pose_solver.hpp"
#include "ffstab/core/error.hpp"
#include "ffstab/core/parallel.hpp"
#include "ffstab/flow/provider.hpp"
#include "ffstab/maskprop/maskprop.hpp"
#include "ffstab/pipeline/pipeline.hpp"

namespace ffstab::eval {

namespace {

double masked_mean_flow(const std::vector<FlowField>& flows,
                        const std::vector<BinaryMask>& masks) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < flows.size(); ++k) {
    const FlowField& f = flows[k];
    const bool use_mask = k < masks.size() && masks[k].count() > 0;
    const std::size_t total = f.u.size();
    for (std::size_t p = 0; p < total; ++p) {
      if (use_mask && !masks[k].data[p]) continue;
      sum += std::hypot(static_cast<double>(f.u[p]), static_cast<double>(f.v[p]));
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

void pose_deltas(const std::vector<Frame>& frames, const pipeline::PairData& pairs,
                 const pipeline::PipelineConfig& cfg, double& max_theta,
                 double& max_scale_dev, double& max_translation) {
  max_theta = 0.0;
  max_scale_dev = 0.0;
  max_translation = 0.0;
  coarse::PoseSolveConfig pose_cfg = cfg.pose;
  for (std::size_t k = 0; k < pairs.flows.size(); ++k) {
    BinaryMask mask = maskprop::binarize(pairs.confs[k], cfg.maskprop.delta_c);
    for (std::size_t p = 0; p < mask.data.size(); ++p) {
      mask.data[p] = mask.data[p] && frames[k].valid.data[p];
    }
    if (mask.count() < 64) mask = frames[k].valid;
    AffinePose pose;
    try {
      pose = coarse::solve_pose(pairs.flows[k], mask, pose_cfg);
    } catch (const numeric_error&) {
      pose = AffinePose{};  // identity: degenerate support contributes no delta
    }
    max_theta = std::max(max_theta, std::abs(pose.theta));
    max_scale_dev = std::max(max_scale_dev, std::abs(pose.s - 1.0));
    max_translation =
        std::max(max_translation, std::max(std::abs(pose.dx), std::abs(pose.dy)));
  }
}

}  // namespace

FixedPointTrace fixed_point_run(const std::vector<Frame>& frames, int iters,
                                const pipeline::PipelineConfig& cfg) {
  if (iters < 1) throw invalid_argument("fixed_point_run: iters must be >= 1");
  if (frames.size() < 2) throw invalid_argument("fixed_point_run: need at least 2 frames");

  flow::ClassicalFlowProvider provider;
  const int workers = resolve_workers(cfg.workers);

  FixedPointTrace trace;
  std::vector<Frame> cur = frames;
  for (int it = 0; it <= iters; ++it) {
    pipeline::PairData pd = pipeline::estimate_pair_data(cur, provider, workers);
    const std::vector<BinaryMask> masks =
        pipeline::window_pair_masks(pd.flows, pd.confs, cfg.fine_window, cfg.maskprop.delta_c);
    trace.mean_flow.push_back(masked_mean_flow(pd.flows, masks));
    double mt = 0.0, ms = 0.0, md = 0.0;
    pose_deltas(cur, pd, cfg, mt, ms, md);
    trace.max_theta.push_back(mt);
    trace.max_scale_dev.push_back(ms);
    trace.max_translation.push_back(md);
    if (it == iters) break;
    pipeline::StabilizeResult sr = pipeline::stabilize_with_flows(cur, pd, cfg);
    cur = std::move(sr.frames);
  }
  return trace;
}

}  // namespace ffstab::eval
