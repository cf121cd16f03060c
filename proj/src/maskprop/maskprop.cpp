// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/maskprop/maskprop.hpp"

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::maskprop {

namespace {

void check_inputs(const std::vector<FlowField>& flows, const std::vector<ConfidenceMap>& confs) {
  if (flows.empty()) throw invalid_argument("backprop_masks: empty flow sequence");
  if (flows.size() != confs.size())
    throw invalid_argument("backprop_masks: flow/confidence length mismatch");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].width != flows[0].width || flows[i].height != flows[0].height ||
        confs[i].width != flows[0].width || confs[i].height != flows[0].height)
      throw invalid_argument("backprop_masks: inconsistent sequence dimensions");
  }
}

std::vector<BinaryMask> reverse_scan(const std::vector<FlowField>& flows,
                                     const std::vector<ConfidenceMap>& confs,
                                     const BinaryMask& seed, double delta_c) {
  const int L = static_cast<int>(flows.size());
  std::vector<BinaryMask> masks(static_cast<std::size_t>(L) + 1);
  masks[L] = seed;
  BinaryMask pre = seed;
  for (int i = L - 1; i >= 0; --i) {
    const BinaryMask warped = warp_mask(pre, flows[i]);
    const BinaryMask fresh = binarize(confs[i], delta_c);
    BinaryMask cur(warped.width, warped.height, false);
    for (std::size_t k = 0; k < cur.data.size(); ++k)
      cur.data[k] = (warped.data[k] && fresh.data[k]) ? 1 : 0;
    masks[i] = cur;
    pre = std::move(cur);
  }
  return masks;
}

}  // namespace

BinaryMask binarize(const ConfidenceMap& confidence, double delta) {
  BinaryMask m(confidence.width, confidence.height, false);
  for (std::size_t k = 0; k < m.data.size(); ++k)
    m.data[k] = confidence.data[k] >= delta ? 1 : 0;
  return m;
}

std::vector<BinaryMask> backprop_masks(const std::vector<FlowField>& flows,
                                       const std::vector<ConfidenceMap>& confs,
                                       const MaskPropConfig& cfg) {
  check_inputs(flows, confs);
  return reverse_scan(flows, confs, binarize(confs.back(), cfg.delta_c), cfg.delta_c);
}

std::vector<BinaryMask> fine_masks(const std::vector<FlowField>& flows,
                                   const std::vector<ConfidenceMap>& confs,
                                   const BinaryMask& coarse_anchor, const MaskPropConfig& cfg) {
  check_inputs(flows, confs);
  if (coarse_anchor.width != flows[0].width || coarse_anchor.height != flows[0].height)
    throw invalid_argument("fine_masks: anchor dimension mismatch");
  return reverse_scan(flows, confs, coarse_anchor, cfg.delta_c);
}

}  // namespace ffstab::maskprop
