// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "ffstab/coarse/pose_solver.hpp"
#include "ffstab/coarse/trajectory.hpp"
#include "ffstab/fine/warp_solver.hpp"
#include "ffstab/maskprop/maskprop.hpp"
#include "ffstab/outpaint/outpaint.hpp"
#include "ffstab/synth/synth.hpp"

namespace ffstab::pipeline {

enum class Provider { kOracle, kClassical };

struct PipelineConfig {
  int workers = 0;  // 0 = resolve from environment / hardware
  Provider provider = Provider::kClassical;
  std::uint64_t seed = 1;

  synth::SynthConfig synth;
  maskprop::MaskPropConfig maskprop;
  coarse::PoseSolveConfig pose;
  coarse::SmoothConfig smooth;
  fine::WarpSolveConfig fine;
  int fine_window = 7;  // frames per fine-stage solve window
  outpaint::OutpaintConfig outpaint;
  int outpaint_neighbors = 2;  // candidate frames per side
  int fixpoint_iters = 5;
};

// Flat-text config: "[section]" headers and "key = value" lines; '#' starts a
// comment. Unknown sections or keys raise invalid_argument (exit code 1).
PipelineConfig parse_config(const std::string& path);
void apply_config_line(PipelineConfig& cfg, const std::string& section, const std::string& key,
                       const std::string& value);

// Echo of the fully resolved configuration, parseable by parse_config.
void write_config(const std::string& path, const PipelineConfig& cfg);
std::string config_text(const PipelineConfig& cfg);

const char* provider_name(Provider p);
Provider provider_from_name(const std::string& name);

}  // namespace ffstab::pipeline
