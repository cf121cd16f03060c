// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ffstab/core/error.hpp"
#include "ffstab/core/types.hpp"
#include "ffstab/core/warp.hpp"
#include "ffstab/fine/warp_solver.hpp"
#include "test_support.hpp"

using namespace ffstab;
using namespace ffstab::fine;

namespace {

FlowField constant_flow(int w, int h, double u, double v) {
  FlowField f(w, h);
  std::fill(f.u.begin(), f.u.end(), u);
  std::fill(f.v.begin(), f.v.end(), v);
  return f;
}

double mean_u(const FlowField& f) {
  return std::accumulate(f.u.begin(), f.u.end(), 0.0) / f.u.size();
}
double mean_v(const FlowField& f) {
  return std::accumulate(f.v.begin(), f.v.end(), 0.0) / f.v.size();
}

double max_mag(const FlowField& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.u.size(); ++k)
    m = std::max(m, std::hypot(f.u[k], f.v[k]));
  return m;
}

}  // namespace

TEST_CASE("residual flow reduces to the pair flow under identity alignments") {
  const AffinePose pose{0.01, 1.005, 2.0, -1.0};
  const FlowField y = test_support::reference_similarity_flow(pose, 48, 36);
  const AlignMatrix ident;
  const FlowField f = residual_pair_flow(ident, ident, y);
  CHECK(test_support::max_abs_flow_diff(f, y) < 1e-9);
}

TEST_CASE("residual flow reflects a translation difference between alignments") {
  const FlowField y = constant_flow(40, 30, 1.5, -0.5);
  AlignMatrix a_k, a_k1;
  a_k1.a[0][2] = 3.0;  // next frame shifts right by 3
  a_k1.a[1][2] = -2.0;
  // F(x) = A_{k+1}(x + Y) - A_k(x) = Y + (3, -2).
  const FlowField f = residual_pair_flow(a_k, a_k1, y);
  for (std::size_t k = 0; k < f.u.size(); ++k) {
    CHECK(f.u[k] == doctest::Approx(1.5 + 3.0).epsilon(1e-9));
    CHECK(f.v[k] == doctest::Approx(-0.5 - 2.0).epsilon(1e-9));
  }
  // Equal alignments on both frames leave the pair flow intact up to the
  // shared linear part acting on Y; a pure shared translation changes nothing.
  AlignMatrix t;
  t.a[0][2] = -7.0;
  const FlowField g = residual_pair_flow(t, t, y);
  CHECK(test_support::max_abs_flow_diff(g, y) < 1e-9);

  AlignMatrix flat;
  flat.a = {{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
  CHECK_THROWS_AS(residual_pair_flow(flat, ffstab::AlignMatrix{}, y), invalid_argument);
}

TEST_CASE("an already-aligned window solves to zero fields and zero objective") {
  const int w = 64, h = 48;
  std::vector<FlowField> residuals(3, FlowField(w, h));
  std::vector<BinaryMask> masks(3, BinaryMask(w, h, true));
  const WarpSolveResult r = solve_warp_fields(residuals, masks);
  REQUIRE(r.fields.size() == 4);
  CHECK(r.objective_initial == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.objective_final <= r.objective_initial);
  CHECK(!r.empty_masks);
  for (const FlowField& f : r.fields) CHECK(max_mag(f) < 1e-9);
}

TEST_CASE("two-pair window with constant residuals reaches the closed form") {
  // Pairs F0 = c0, F1 = c1 with W0 = W2 = 0 pinned: the data term
  // |c0 - W1|^2 + |c1 + W1|^2 is minimal at W1 = (c0 - c1) / 2, and constant
  // fields cost nothing in the smoothness term. Pixels whose shifted sample
  // x + F0 leaves the grid relax the c0 pull near the border, so the exact
  // agreement is claimed only away from the edge bands.
  const int w = 128, h = 96;
  const double c0u = 2.0, c0v = -1.0, c1u = 0.5, c1v = 1.0;
  const double wu = (c0u - c1u) / 2, wv = (c0v - c1v) / 2;
  std::vector<FlowField> residuals = {constant_flow(w, h, c0u, c0v),
                                      constant_flow(w, h, c1u, c1v)};
  std::vector<BinaryMask> masks(2, BinaryMask(w, h, true));
  WarpSolveConfig cfg;
  cfg.iters = 1500;
  const WarpSolveResult r = solve_warp_fields(residuals, masks, cfg);
  REQUIRE(r.fields.size() == 3);
  CHECK(max_mag(r.fields[0]) == 0.0);
  CHECK(max_mag(r.fields[2]) == 0.0);
  CHECK(mean_u(r.fields[1]) == doctest::Approx(wu).epsilon(0.02));
  CHECK(mean_v(r.fields[1]) == doctest::Approx(wv).epsilon(0.02));
  CHECK(r.fields[1].u[r.fields[1].idx(h / 2, w / 2)] == doctest::Approx(wu).epsilon(5e-3));
  CHECK(r.fields[1].v[r.fields[1].idx(h / 2, w / 2)] == doctest::Approx(wv).epsilon(5e-3));
  // Central block well clear of the border bands (several node spacings in).
  for (int i = 40; i < 56; ++i)
    for (int j = 56; j < 72; ++j) {
      const std::size_t k = r.fields[1].idx(i, j);
      CHECK(std::abs(r.fields[1].u[k] - wu) < 1e-2);
      CHECK(std::abs(r.fields[1].v[k] - wv) < 1e-2);
    }
}

TEST_CASE("the objective never increases and drops on a misaligned window") {
  const int w = 96, h = 72;
  std::vector<FlowField> residuals;
  residuals.push_back(test_support::reference_similarity_flow({0.004, 1.0, 1.5, -0.8}, w, h));
  residuals.push_back(test_support::reference_similarity_flow({-0.006, 1.002, -1.0, 0.6}, w, h));
  residuals.push_back(test_support::reference_similarity_flow({0.002, 0.998, 0.4, 1.2}, w, h));
  std::vector<BinaryMask> masks(3, BinaryMask(w, h, true));
  const WarpSolveResult r = solve_warp_fields(residuals, masks);
  CHECK(r.objective_final <= r.objective_initial);
  CHECK(r.objective_final < 0.5 * r.objective_initial);
  CHECK(r.iters_run <= 100);
  CHECK(max_mag(r.fields.front()) == 0.0);
  CHECK(max_mag(r.fields.back()) == 0.0);
}

TEST_CASE("iters = 0 keeps the initial zero fields") {
  const int w = 48, h = 36;
  std::vector<FlowField> residuals = {constant_flow(w, h, 2.0, 0.0),
                                      constant_flow(w, h, -1.0, 1.0)};
  std::vector<BinaryMask> masks(2, BinaryMask(w, h, true));
  WarpSolveConfig cfg;
  cfg.iters = 0;
  const WarpSolveResult r = solve_warp_fields(residuals, masks, cfg);
  CHECK(r.iters_run == 0);
  CHECK(r.objective_final == r.objective_initial);
  for (const FlowField& f : r.fields) CHECK(max_mag(f) == 0.0);
}

TEST_CASE("all-empty masks zero the data term and are flagged") {
  const int w = 48, h = 36;
  std::vector<FlowField> residuals = {constant_flow(w, h, 5.0, 5.0)};
  std::vector<BinaryMask> masks = {BinaryMask(w, h, false)};
  const WarpSolveResult r = solve_warp_fields(residuals, masks);
  CHECK(r.empty_masks);
  for (const FlowField& f : r.fields) CHECK(max_mag(f) == 0.0);
}

TEST_CASE("solver validates its inputs") {
  std::vector<FlowField> residuals = {FlowField(32, 24)};
  std::vector<BinaryMask> masks = {BinaryMask(32, 24, true)};
  CHECK_THROWS_AS(solve_warp_fields({}, {}), invalid_argument);
  CHECK_THROWS_AS(solve_warp_fields(residuals, {}), invalid_argument);
  WarpSolveConfig bad;
  bad.grid_stride = 2;
  CHECK_THROWS_AS(solve_warp_fields(residuals, masks, bad), invalid_argument);
  bad = {};
  bad.iters = -1;
  CHECK_THROWS_AS(solve_warp_fields(residuals, masks, bad), invalid_argument);
  bad = {};
  bad.step = 0.0;
  CHECK_THROWS_AS(solve_warp_fields(residuals, masks, bad), invalid_argument);
  std::vector<BinaryMask> off = {BinaryMask(33, 24, true)};
  CHECK_THROWS_AS(solve_warp_fields(residuals, off), invalid_argument);
}

TEST_CASE("combined warp application matches its sampling formula") {
  const Frame f = test_support::textured_frame(40, 30, 13);

  SUBCASE("identity everywhere is a no-op") {
    const std::vector<Frame> out =
        apply_warps({f}, {AlignMatrix{}}, {FlowField(40, 30)});
    REQUIRE(out.size() == 1);
    CHECK(test_support::max_frame_diff(out[0], f) < 1e-7);
    for (std::size_t k = 0; k < f.valid.data.size(); ++k)
      CHECK(out[0].valid.data[k] == f.valid.data[k]);
  }

  SUBCASE("alignment and warp compose in one resample") {
    AlignMatrix a;
    a.a[0][2] = 3.0;  // A = shift right 3
    const FlowField w = constant_flow(40, 30, 1.0, 0.0);
    // out(x) = f(A^{-1}(x + W)) = f(x + (1,0) - (3,0)) = f(x - (2,0)).
    const std::vector<Frame> out = apply_warps({f}, {a}, {w});
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 40; ++j) {
        if (j >= 2 && j <= 38) {  // x + W must also stay in range for sampling
          CHECK(out[0].valid.at(i, j));
          CHECK(out[0].at(i, j) == doctest::Approx(f.at(i, j - 2)).epsilon(1e-6));
        } else if (j < 2) {
          CHECK(!out[0].valid.at(i, j));
        }
      }
  }

  SUBCASE("count mismatches are rejected") {
    CHECK_THROWS_AS(apply_warps({f, f}, {AlignMatrix{}}, {FlowField(40, 30)}),
                    invalid_argument);
  }
}
