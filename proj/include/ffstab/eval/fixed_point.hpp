// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ffstab/core/types.hpp"
#include "ffstab/pipeline/config.hpp"

namespace ffstab::eval {

// Convergence trace of repeated re-stabilization. Entry 0 measures the input
// sequence; entry i (i >= 1) measures the result of the i-th stabilization
// pass. All vectors share length iters + 1.
struct FixedPointTrace {
  std::vector<double> mean_flow;        // mean |flow| over mask-selected pixels, px
  std::vector<double> max_theta;        // max over pairs of |theta|, rad
  std::vector<double> max_scale_dev;    // max over pairs of |s - 1|
  std::vector<double> max_translation;  // max over pairs of max(|dx|, |dy|), px
};

// Repeatedly applies the two-stage stabilizer to its own output. Each round
// estimates adjacent-pair flows once (block matching) and reuses them both for
// the measurement and for the stabilization pass that produces the next round's
// input. Flow statistics are restricted to the back-propagated shared-region
// masks; a pair whose mask comes up empty falls back to all pixels. A perfectly
// stable input is (numerically) a fixed point: every entry stays near zero.
// Throws invalid_argument for iters < 1 or fewer than 2 frames.
FixedPointTrace fixed_point_run(const std::vector<Frame>& frames, int iters,
                                const pipeline::PipelineConfig& cfg);

}  // namespace ffstab::eval
