// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ffstab/core/error.hpp"
#include "ffstab/core/types.hpp"
#include "ffstab/core/warp.hpp"
#include "ffstab/outpaint/outpaint.hpp"
#include "test_support.hpp"

using namespace ffstab;
using namespace ffstab::outpaint;
using test_support::textured_frame;

namespace {

BinaryMask center_box(int w, int h, int margin) {
  BinaryMask m(w, h, false);
  for (int i = margin; i < h - margin; ++i)
    for (int j = margin; j < w - margin; ++j) m.set(i, j, true);
  return m;
}

// Clean-room re-implementation of the label refinement: init from the
// documented priority rule, then iterated window-max with 1/-1 re-pinning
// until the change count drops to the stop threshold.
struct SimResult {
  std::vector<std::int8_t> labels;
  BinaryMask mask;
  int iterations = 0;
  int last_changed = 0;
};

SimResult simulate_refinement(const DistanceMap& d, const BinaryMask& target_valid,
                              const BinaryMask& crop_valid, double delta, int k_tin, int eta_t) {
  const int w = d.width, h = d.height;
  std::vector<std::int8_t> seed(static_cast<std::size_t>(w) * h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      std::int8_t lab;
      if (!target_valid.at(i, j)) lab = 1;
      else if (!crop_valid.at(i, j)) lab = 2;
      else if (d.at(i, j) < delta) lab = 0;
      else lab = -1;
      seed[static_cast<std::size_t>(i) * w + j] = lab;
    }
  std::vector<std::int8_t> cur = seed, next(cur.size());
  SimResult r;
  const int rad = k_tin / 2;
  int changed = 0;
  do {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        std::int8_t best = -1;
        for (int di = -rad; di <= rad; ++di)
          for (int dj = -rad; dj <= rad; ++dj) {
            const int ii = std::clamp(i + di, 0, h - 1);
            const int jj = std::clamp(j + dj, 0, w - 1);
            best = std::max(best, cur[static_cast<std::size_t>(ii) * w + jj]);
          }
        next[static_cast<std::size_t>(i) * w + j] = best;
      }
    for (std::size_t p = 0; p < next.size(); ++p) {
      if (seed[p] == 1) next[p] = 1;
      else if (seed[p] == -1) next[p] = -1;
    }
    changed = 0;
    for (std::size_t p = 0; p < next.size(); ++p) changed += next[p] != cur[p];
    cur.swap(next);
    ++r.iterations;
  } while (changed > eta_t);
  r.last_changed = changed;
  r.labels = cur;
  r.mask = BinaryMask(w, h);
  for (std::size_t p = 0; p < cur.size(); ++p) r.mask.data[p] = cur[p] == 2 ? 1 : 0;
  return r;
}

// Full-canvas constant-color candidate with an explicit fill box.
FusionCandidate boxed_candidate(int w, int h, float color, int r0, int r1, int c0, int c1,
                                double a_s, double a_u) {
  FusionCandidate c;
  c.result = Frame(w, h, 1);
  std::fill(c.result.data.begin(), c.result.data.end(), color);
  c.fill_mask = BinaryMask(w, h, false);
  for (int i = r0; i < r1; ++i)
    for (int j = c0; j < c1; ++j) c.fill_mask.set(i, j, true);
  c.area_stable = a_s;
  c.area_unstable = a_u;
  return c;
}

}  // namespace

TEST_CASE("flow extension reproduces affine fields and keeps valid pixels bit-exact") {
  const int w = 96, h = 72;
  const AffinePose pose{0.015, 1.01, 3.0, -2.0};
  const FlowField truth = test_support::reference_similarity_flow(pose, w, h);
  const BinaryMask valid = center_box(w, h, 18);

  FlowField inside = truth;
  // Scramble the invalid region so the test can't pass by accident.
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      if (!valid.at(i, j)) {
        inside.u[inside.idx(i, j)] = 99.0;
        inside.v[inside.idx(i, j)] = -99.0;
      }

  const FlowField out = outpaint_flow(inside, valid);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const std::size_t k = out.idx(i, j);
      if (valid.at(i, j)) {
        CHECK(out.u[k] == inside.u[k]);
        CHECK(out.v[k] == inside.v[k]);
      } else {
        CHECK(std::abs(out.u[k] - truth.u[k]) < 1e-6);
        CHECK(std::abs(out.v[k] - truth.v[k]) < 1e-6);
      }
    }

  CHECK_THROWS_AS(outpaint_flow(inside, BinaryMask(w, h, false)), invalid_argument);
}

TEST_CASE("flow extension of noisy data stays within the observed range") {
  Rng rng(55);
  const int w = 64, h = 48;
  FlowField f(w, h);
  const BinaryMask valid = center_box(w, h, 12);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const std::size_t k = f.idx(i, j);
      f.u[k] = 1.0 + rng.uniform(-0.2, 0.2);
      f.v[k] = -0.5 + rng.uniform(-0.2, 0.2);
      if (valid.at(i, j)) {
        lo = std::min(lo, f.u[k]);
        hi = std::max(hi, f.u[k]);
      }
    }
  const FlowField out = outpaint_flow(f, valid);
  // Harmonic extension obeys a maximum principle; the affine trend can add
  // only a mild extrapolation on this shallow fit.
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    CHECK(out.u[k] > lo - 0.2);
    CHECK(out.u[k] < hi + 0.2);
  }
}

TEST_CASE("patch distance separates aligned, shifted, and inverted content") {
  const Frame a = textured_frame(96, 72, 77);

  SUBCASE("identical frames sit at zero") {
    const DistanceMap d = patch_distance(a, a);
    float worst = 0.0f;
    for (float v : d.data) worst = std::max(worst, v);
    CHECK(worst < 1e-4f);
  }

  SUBCASE("inverted content sits near two") {
    Frame b = a;
    for (float& v : b.data) v = 1.0f - v;
    const DistanceMap d = patch_distance(a, b);
    for (int i = 8; i < 64; ++i)
      for (int j = 8; j < 88; ++j) CHECK(d.at(i, j) > 1.9f);
  }

  SUBCASE("a four-pixel shift reads as misaligned on most texture") {
    FlowField shift(96, 72);
    std::fill(shift.u.begin(), shift.u.end(), 4.0);
    const Frame b = warp_frame(a, shift);
    const DistanceMap d = patch_distance(a, b);
    int over = 0, n = 0;
    for (int i = 8; i < 64; ++i)
      for (int j = 8; j < 84; ++j) {
        over += d.at(i, j) > 0.04f ? 1 : 0;
        ++n;
      }
    CHECK(double(over) / n > 0.75);
  }

  SUBCASE("invalid pixels in either frame pin the distance to two") {
    Frame b = a;
    b.valid.set(10, 20, false);
    const DistanceMap d = patch_distance(a, b);
    CHECK(d.at(10, 20) == 2.0f);
    Frame c = a;
    c.valid.set(30, 40, false);
    const DistanceMap d2 = patch_distance(c, a);
    CHECK(d2.at(30, 40) == 2.0f);
  }
}

TEST_CASE("threshold calibration lands between the aligned and shifted classes") {
  std::vector<Frame> targets, candidates;
  FlowField resample(96, 72);
  std::fill(resample.u.begin(), resample.u.end(), 0.3);  // sub-pixel rendering blur
  for (std::uint64_t s : {101, 102, 103}) {
    targets.push_back(textured_frame(96, 72, s));
    candidates.push_back(warp_frame(targets.back(), resample));
  }
  const double t = calibrate_patch_threshold(targets, candidates, 2.0);
  CHECK(t > 0.0);
  CHECK(t < 1.0);

  // Bit-identical pairs are perfectly separable at zero, and the equal-error
  // point degenerates with them.
  CHECK(calibrate_patch_threshold({targets[0]}, {targets[0]}, 2.0) == 0.0);

  CHECK_THROWS_AS(calibrate_patch_threshold({}, {}, 2.0), invalid_argument);
  CHECK_THROWS_AS(calibrate_patch_threshold(targets, {}, 2.0), invalid_argument);
  CHECK_THROWS_AS(calibrate_patch_threshold(targets, candidates, 0.0), invalid_argument);
  std::vector<Frame> off = {textured_frame(64, 48, 9), textured_frame(96, 72, 9),
                            textured_frame(96, 72, 10)};
  CHECK_THROWS_AS(calibrate_patch_threshold(targets, off, 2.0), invalid_argument);
}

TEST_CASE("label refinement matches an independent simulation bit for bit") {
  for (int size : {16, 32}) {
    CAPTURE(size);
    const int w = size, h = size;
    const Frame crop_target = textured_frame(w, h, 300 + size);
    Frame candidate = crop_target;
    // Invert a block so it reads as misaligned (-1 seeds) while staying valid.
    for (int i = h / 2 - 2; i < h / 2 + 2; ++i)
      for (int j = w / 2 - 2; j < w / 2 + 2; ++j)
        for (int c = 0; c < candidate.channels; ++c)
          candidate.at(i, j, c) = 1.0f - candidate.at(i, j, c);

    BinaryMask target_valid(w, h, true);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < 3; ++j) target_valid.set(i, j, false);  // left strip: extension zone
    BinaryMask crop_valid(w, h, true);
    for (int i = 0; i < h; ++i)
      for (int j = w - 4; j < w; ++j) crop_valid.set(i, j, false);  // right strip: keep target

    const Frame target = crop_target;
    for (int eta_t : {0, 3}) {
      CAPTURE(eta_t);
      OutpaintConfig cfg;
      cfg.eta_t = eta_t;
      cfg.k_tin = 5;
      const OutpaintMaskResult got =
          outpaint_mask(target, crop_target, candidate, target_valid, crop_valid, cfg);
      const DistanceMap d = patch_distance(crop_target, candidate);
      const SimResult want = simulate_refinement(d, target_valid, crop_valid,
                                                 effective_delta_d(cfg), cfg.k_tin, cfg.eta_t);
      CHECK(got.labels == want.labels);
      CHECK(got.mask.data == want.mask.data);
      CHECK(got.iterations == want.iterations);
      CHECK(got.last_changed == want.last_changed);
    }
  }
}

TEST_CASE("a width-one window makes the refinement a pure relabeling") {
  // k_tin = 1 dilates nothing, so the first pass already changes no pixels and
  // the output is exactly the seed labeling.
  const int w = 8, h = 8;
  Frame t = textured_frame(w, h, 41);
  Frame cand = t;
  for (int c = 0; c < cand.channels; ++c) cand.at(2, 6, c) = 1.0f - cand.at(2, 6, c);
  BinaryMask target_valid(w, h, true);
  target_valid.set(0, 0, false);
  target_valid.set(0, 1, false);
  BinaryMask crop_valid(w, h, true);
  crop_valid.set(7, 7, false);
  crop_valid.set(6, 7, false);

  OutpaintConfig cfg;
  cfg.k_tin = 1;
  cfg.eta_t = 0;
  const OutpaintMaskResult r = outpaint_mask(t, t, cand, target_valid, crop_valid, cfg);
  CHECK(r.iterations == 1);
  CHECK(r.last_changed == 0);
  const DistanceMap d = patch_distance(t, cand);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const std::int8_t lab = r.labels[static_cast<std::size_t>(i) * w + j];
      if (!target_valid.at(i, j)) CHECK(lab == 1);
      else if (!crop_valid.at(i, j)) CHECK(lab == 2);
      else if (d.at(i, j) < effective_delta_d(cfg)) CHECK(lab == 0);
      else CHECK(lab == -1);
      CHECK(r.mask.at(i, j) == (lab == 2));
    }
}

TEST_CASE("label refinement rejects malformed configuration") {
  const Frame t = textured_frame(16, 16, 4);
  const BinaryMask m(16, 16, true);
  OutpaintConfig cfg;
  cfg.k_tin = 4;
  CHECK_THROWS_AS(outpaint_mask(t, t, t, m, m, cfg), invalid_argument);
  cfg = {};
  cfg.eta_t = -1;
  CHECK_THROWS_AS(outpaint_mask(t, t, t, m, m, cfg), invalid_argument);
  const Frame small = textured_frame(8, 16, 4);
  CHECK_THROWS_AS(outpaint_mask(t, small, t, m, m, OutpaintConfig{}), invalid_argument);
}

TEST_CASE("margin fusion picks sides by the keep mask and unions validity") {
  const int w = 6, h = 5;
  Frame target(w, h, 2);
  Frame cand(w, h, 2);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      target.at(i, j, 0) = 0.25f;
      target.at(i, j, 1) = float(i);
      cand.at(i, j, 0) = 0.75f;
      cand.at(i, j, 1) = float(j);
      target.valid.set(i, j, j < 4);
      cand.valid.set(i, j, j > 1);
    }
  BinaryMask keep(w, h, false);
  for (int i = 0; i < h; ++i) keep.set(i, 0, true), keep.set(i, 1, true);

  const Frame out = fuse_margin(target, cand, keep);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (keep.at(i, j)) {
        CHECK(out.at(i, j, 0) == 0.25f);
        CHECK(out.at(i, j, 1) == float(i));
      } else {
        CHECK(out.at(i, j, 0) == 0.75f);
        CHECK(out.at(i, j, 1) == float(j));
      }
      CHECK(out.valid.at(i, j) == (target.valid.at(i, j) || cand.valid.at(i, j)));
    }
  const Frame bad(w + 1, h, 2);
  CHECK_THROWS_AS(fuse_margin(target, bad, keep), invalid_argument);
}

TEST_CASE("fusion gates admit and reject candidates as configured") {
  const int w = 40, h = 30;
  Frame target(w, h, 1);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      target.at(i, j, 0) = 0.5f;
      target.valid.set(i, j, j < 20);  // right half missing
    }
  OutpaintConfig cfg;
  cfg.ref_width = w;
  cfg.ref_height = h;  // gate thresholds apply unscaled
  cfg.eta_u = 50;
  cfg.eta_s = 10;
  cfg.eta_r = 1.2;
  cfg.delta_r = 0.8;

  SUBCASE("a clean candidate is accepted and fills only missing pixels") {
    // Box straddles the validity edge: columns 15..34, rows 5..15.
    const FusionCandidate c = boxed_candidate(w, h, 0.2f, 5, 15, 15, 35, 200, 0);
    const MultiFuseResult r = multi_frame_fuse(target, {c}, cfg);
    REQUIRE(r.decisions.size() == 1);
    CHECK(r.decisions[0].accepted);
    CHECK(r.decisions[0].ratio == doctest::Approx(0.0));
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        if (j < 20) {
          CHECK(r.fused.at(i, j, 0) == 0.5f);  // original content never overwritten
        } else if (i >= 5 && i < 15 && j < 35) {
          CHECK(r.fused.at(i, j, 0) == 0.2f);
          CHECK(r.fused.valid.at(i, j));
        } else {
          CHECK(!r.fused.valid.at(i, j));
        }
      }
  }

  SUBCASE("too much unstable area is rejected") {
    const FusionCandidate c = boxed_candidate(w, h, 0.2f, 5, 15, 20, 35, 150, 60);
    const MultiFuseResult r = multi_frame_fuse(target, {c}, cfg);
    CHECK(!r.decisions[0].accepted);
    CHECK(r.fused.valid.count() == target.valid.count());
  }

  SUBCASE("the area ratio gate flips in literal mode") {
    FusionCandidate c = boxed_candidate(w, h, 0.2f, 5, 15, 20, 35, 30, 45);
    OutpaintConfig loose = cfg;
    loose.eta_u = 1000;
    // ratio = 45 / 31 = 1.45 >= 1.2: rejected normally, accepted literally.
    MultiFuseResult r = multi_frame_fuse(target, {c}, loose);
    CHECK(!r.decisions[0].accepted);
    CHECK(r.decisions[0].ratio == doctest::Approx(45.0 / 31.0).epsilon(1e-12));
    loose.literal_alg3 = true;
    r = multi_frame_fuse(target, {c}, loose);
    CHECK(r.decisions[0].accepted);
  }

  SUBCASE("the minimum-area gate is strict") {
    const FusionCandidate c = boxed_candidate(w, h, 0.2f, 5, 15, 20, 35, 10, 0);
    const MultiFuseResult r = multi_frame_fuse(target, {c}, cfg);
    CHECK(!r.decisions[0].accepted);  // a_s must exceed eta_s, 10 > 10 fails
  }

  SUBCASE("negative areas and shape mismatches are rejected") {
    FusionCandidate c = boxed_candidate(w, h, 0.2f, 5, 15, 20, 35, 100, 0);
    c.area_unstable = -1.0;
    CHECK_THROWS_AS(multi_frame_fuse(target, {c}, cfg), invalid_argument);
    FusionCandidate d = boxed_candidate(w + 2, h, 0.2f, 5, 15, 20, 35, 100, 0);
    CHECK_THROWS_AS(multi_frame_fuse(target, {d}, cfg), invalid_argument);
  }

  SUBCASE("no candidates leaves the target untouched") {
    const MultiFuseResult r = multi_frame_fuse(target, {}, cfg);
    CHECK(r.fused.data == target.data);
    CHECK(r.fused.valid.data == target.valid.data);
    CHECK(r.decisions.empty());
  }
}

TEST_CASE("overlapping fills: bigger areas win pixels, overlap gate sees the canvas") {
  const int w = 40, h = 30;
  Frame target(w, h, 1);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      target.at(i, j, 0) = 0.5f;
      target.valid.set(i, j, j < 20);
    }
  OutpaintConfig cfg;
  cfg.ref_width = w;
  cfg.ref_height = h;
  cfg.eta_u = 50;
  cfg.eta_s = 10;
  cfg.delta_r = 0.8;

  // A: 50 px box; B: 160 px box containing A's. Input order holds B first to
  // show decisions stay in input order while processing goes small to large.
  const FusionCandidate a = boxed_candidate(w, h, 0.2f, 5, 10, 25, 35, 50, 0);
  const FusionCandidate b = boxed_candidate(w, h, 0.8f, 5, 21, 25, 35, 160, 0);

  SUBCASE("under a loose overlap gate the larger fill overwrites the smaller") {
    const MultiFuseResult r = multi_frame_fuse(target, {b, a}, cfg);
    CHECK(r.decisions[0].accepted);  // b
    CHECK(r.decisions[1].accepted);  // a
    CHECK(r.decisions[0].overlap == doctest::Approx(50.0 / 160.0).epsilon(1e-12));
    CHECK(r.decisions[1].overlap == doctest::Approx(0.0));
    for (int i = 5; i < 21; ++i)
      for (int j = 25; j < 35; ++j) CHECK(r.fused.at(i, j, 0) == 0.8f);
  }

  SUBCASE("a tight overlap gate rejects the later, larger fill") {
    OutpaintConfig tight = cfg;
    tight.delta_r = 0.25;
    const MultiFuseResult r = multi_frame_fuse(target, {b, a}, tight);
    CHECK(!r.decisions[0].accepted);  // b: 50/160 = 0.3125 >= 0.25
    CHECK(r.decisions[1].accepted);
    for (int i = 5; i < 10; ++i)
      for (int j = 25; j < 35; ++j) CHECK(r.fused.at(i, j, 0) == 0.2f);
    for (int i = 10; i < 21; ++i)
      for (int j = 25; j < 35; ++j) CHECK(!r.fused.valid.at(i, j));
  }
}

TEST_CASE("hole filling copies the nearest valid pixel, exactly by distance") {
  const int w = 24, h = 20;
  Frame f(w, h, 2);
  Rng rng(8);
  std::vector<std::pair<int, int>> anchors;
  for (int k = 0; k < 14; ++k) {
    const int i = static_cast<int>(rng.uniform_index(h));
    const int j = static_cast<int>(rng.uniform_index(w));
    anchors.emplace_back(i, j);
  }
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      f.at(i, j, 0) = float(i * 100 + j);
      f.at(i, j, 1) = float(-(i + j));
      f.valid.set(i, j, false);
    }
  for (auto [i, j] : anchors) f.valid.set(i, j, true);

  const Frame out = fill_holes(f);
  CHECK(out.valid.count() == static_cast<std::size_t>(w) * h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (f.valid.at(i, j)) {
        CHECK(out.at(i, j, 0) == f.at(i, j, 0));
        continue;
      }
      long best = std::numeric_limits<long>::max();
      for (auto [ai, aj] : anchors) {
        const long d = long(ai - i) * (ai - i) + long(aj - j) * (aj - j);
        best = std::min(best, d);
      }
      // The filled value must come from one of the anchors at that distance.
      bool matched = false;
      for (auto [ai, aj] : anchors) {
        const long d = long(ai - i) * (ai - i) + long(aj - j) * (aj - j);
        if (d == best && out.at(i, j, 0) == f.at(ai, aj, 0) &&
            out.at(i, j, 1) == f.at(ai, aj, 1)) {
          matched = true;
          break;
        }
      }
      CHECK(matched);
    }

  Frame empty(8, 8, 1);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) empty.valid.set(i, j, false);
  CHECK_THROWS_AS(fill_holes(empty), invalid_argument);

  const Frame full = textured_frame(16, 12, 2);
  const Frame same = fill_holes(full);
  CHECK(same.data == full.data);
}

TEST_CASE("gate scaling follows the frame area") {
  OutpaintConfig cfg;
  CHECK(scaled_eta_u(cfg, 720, 480) == doctest::Approx(cfg.eta_u).epsilon(1e-12));
  CHECK(scaled_eta_s(cfg, 720, 480) == doctest::Approx(cfg.eta_s).epsilon(1e-12));
  CHECK(scaled_eta_u(cfg, 360, 240) == doctest::Approx(cfg.eta_u / 4).epsilon(1e-12));
  CHECK(scaled_eta_s(cfg, 1440, 960) == doctest::Approx(cfg.eta_s * 4).epsilon(1e-12));
  CHECK(effective_delta_d(cfg) == cfg.delta_d);
  cfg.literal_alg3 = true;
  CHECK(effective_delta_d(cfg) == cfg.delta_d_literal);
}
