// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "ffstab/core/types.hpp"
#include "ffstab/synth/synth.hpp"

namespace ffstab::flow {

struct FlowResult {
  FlowField flow;          // on tgt's grid, pointing into src
  ConfidenceMap confidence;  // [0,1]
};

// Dense correspondence provider. The returned field follows the backward-warp
// convention: warp_frame(src, flow) reconstructs tgt where confidence allows.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;
  // src_idx/tgt_idx identify the frames within a sequence; providers that
  // derive flow analytically require them, image-based providers ignore them.
  virtual FlowResult estimate(const Frame& src, const Frame& tgt, int src_idx,
                              int tgt_idx) = 0;
};

// Exact flow from a synthetic clip's ground-truth transforms. Confidence is 1
// except on mover pixels (either endpoint) and samples leaving the source
// frame, where it is 0.
class OracleFlowProvider : public FlowProvider {
 public:
  enum class Stream { kStable, kUnstable };
  OracleFlowProvider(const synth::SynthClip& clip, Stream stream);
  FlowResult estimate(const Frame& src, const Frame& tgt, int src_idx, int tgt_idx) override;

 private:
  std::vector<Homography> to_base_;
  std::vector<BinaryMask> movers_;
};

// Coarse-to-fine block matcher: image pyramid, per-node SSD search with
// subpixel parabola refinement, 5x5 median on the node field, bilinear
// upsampling. Confidence is forward-backward consistency gated by local
// texture.
class ClassicalFlowProvider : public FlowProvider {
 public:
  struct Options {
    int levels = 3;
    int grid_step = 2;        // node stride per level
    int patch_radius = 4;     // SSD window half-size
    int search_coarse = 6;    // +- px at the coarsest level
    int search_fine = 2;      // +- px at refinement levels
    double fb_tol = 1.0;      // px, forward-backward tolerance
    double texture_floor = 1e-4;  // mean squared gradient gate
  };

  ClassicalFlowProvider() = default;
  explicit ClassicalFlowProvider(const Options& opt) : opt_(opt) {}
  FlowResult estimate(const Frame& src, const Frame& tgt, int src_idx, int tgt_idx) override;

 private:
  Options opt_;
};

// Convenience wrapper over provider.estimate.
FlowResult estimate_flow(const Frame& src, const Frame& tgt, FlowProvider& provider,
                         int src_idx = -1, int tgt_idx = -1);

// c(x) = exp(-|fwd(x) + bwd(x + fwd(x))| / tol), clamped to [0,1]; samples of
// bwd leaving its grid give confidence 0. tol must be positive.
ConfidenceMap fb_confidence(const FlowField& fwd, const FlowField& bwd, double tol);

}  // namespace ffstab::flow
