// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ffstab/core/types.hpp"

namespace ffstab::maskprop {

struct MaskPropConfig {
  int start = 5;        // first coarse sample index in a sequence
  int interval = 10;    // coarse sampling interval d
  double delta_c = 0.5; // confidence binarization threshold
  int samples = 5;      // coarse samples per window (window spans (samples-1)*interval)
};

// mask(x) = confidence(x) >= delta (ties count as true).
BinaryMask binarize(const ConfidenceMap& confidence, double delta);

// Reverse-scan shared-region masks. Given L pairwise flows (flows[i] connects
// frame i to frame i+1, backward-warp convention) and L confidences (confs[i]
// lives on frame i), returns L+1 masks: masks[L] is the seed —
// binarize(confs[L-1]) — and for i = L-1..0,
//   masks[i] = warp_mask(masks[i+1], flows[i]) AND binarize(confs[i]).
// Every output is a subset of its own binarized confidence.
std::vector<BinaryMask> backprop_masks(const std::vector<FlowField>& flows,
                                       const std::vector<ConfidenceMap>& confs,
                                       const MaskPropConfig& cfg);

// Same scan seeded with a coarse-scale anchor instead of the last confidence:
// masks[L] = anchor. Used to densify a coarse window gap at interval 1.
std::vector<BinaryMask> fine_masks(const std::vector<FlowField>& flows,
                                   const std::vector<ConfidenceMap>& confs,
                                   const BinaryMask& coarse_anchor, const MaskPropConfig& cfg);

}  // namespace ffstab::maskprop
