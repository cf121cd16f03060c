// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffstab/core/types.hpp"
#include "ffstab/eval/fixed_point.hpp"
#include "ffstab/outpaint/outpaint.hpp"

namespace ffstab::pipeline {

// Summary quality numbers for a stabilized (optionally outpainted) sequence.
// All scores live in [0, 1]; stability needs >= 32 frames and is absent below
// that.
struct MetricsReport {
  double cropping_ratio = 0.0;
  double distortion_value = 0.0;
  std::optional<double> stability;
  std::vector<double> frame_valid_fraction;  // per output frame
  std::vector<double> frame_distortion;      // per output frame
};

// Assembles the report from the input/output sequences and the per-frame
// input->output affine maps the pipeline applied. An empty `maps` means the
// output kept the input geometry (compositing only) and scores distortion 1.
// Stability is re-measured from the rendered output frames when the sequence
// is long enough (>= 32 frames), and left absent otherwise.
MetricsReport compute_metrics(const std::vector<Frame>& input, const std::vector<Frame>& output,
                              const std::vector<AlignMatrix>& maps);

void write_metrics_csv(const std::string& path, const MetricsReport& report);
void write_metrics_text(const std::string& path, const MetricsReport& report);

// Trace CSV: one row per iteration with all four series.
void write_trace_csv(const std::string& path, const eval::FixedPointTrace& trace);
// Self-contained SVG with one line-plot panel per series.
void write_trace_svg(const std::string& path, const eval::FixedPointTrace& trace);

// Flat-text table of per-target fusion decisions (one block per target frame).
void write_fusion_table(const std::string& path,
                        const std::vector<std::vector<outpaint::FuseDecision>>& decisions);

// Label-map debug dump as 8-bit binary PGM (-1 dark ... 2 white); masks go
// through the shared mask writer in the io module.
void write_labels_pgm(const std::string& path, const std::vector<std::int8_t>& labels, int width,
                      int height);

}  // namespace ffstab::pipeline
