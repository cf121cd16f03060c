// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/fine/warp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ffstab/core/error.hpp"
#include "ffstab/core/warp.hpp"

namespace ffstab::fine {

namespace {

struct Affine23 {
  double m[2][3];
};

Affine23 from_align(const AlignMatrix& a) {
  Affine23 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a.a[i][j];
  return r;
}

Affine23 mul(const Affine23& a, const Affine23& b) {  // a after b
  Affine23 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    }
    r.m[i][2] = a.m[i][0] * b.m[0][2] + a.m[i][1] * b.m[1][2] + a.m[i][2];
  }
  return r;
}

Vec2 apply23(const Affine23& a, const Vec2& p) {
  return {a.m[0][0] * p.x + a.m[0][1] * p.y + a.m[0][2],
          a.m[1][0] * p.x + a.m[1][1] * p.y + a.m[1][2]};
}

double det2(const AlignMatrix& a) {
  return a.a[0][0] * a.a[1][1] - a.a[0][1] * a.a[1][0];
}

// Piecewise-bilinear displacement field parameterized by control nodes on a
// regular grid of the given stride; evaluation clamps to the grid extent.
struct ControlGrid {
  int nx = 0, ny = 0;
  double stride = 1.0;
  std::vector<double> u, v;

  void init(int width, int height, int stride_px) {
    stride = stride_px;
    nx = static_cast<int>((width - 1) / stride) + 2;
    ny = static_cast<int>((height - 1) / stride) + 2;
    u.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    v.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  }

  struct Taps {
    int i00, i10, i01, i11;
    double w00, w10, w01, w11;
  };

  Taps taps(double x, double y) const {
    double gx = x / stride;
    double gy = y / stride;
    gx = std::clamp(gx, 0.0, static_cast<double>(nx - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(ny - 1));
    int ix = std::min(static_cast<int>(gx), nx - 2);
    int iy = std::min(static_cast<int>(gy), ny - 2);
    const double fx = gx - ix;
    const double fy = gy - iy;
    Taps t;
    t.i00 = iy * nx + ix;
    t.i10 = t.i00 + 1;
    t.i01 = t.i00 + nx;
    t.i11 = t.i01 + 1;
    t.w00 = (1.0 - fx) * (1.0 - fy);
    t.w10 = fx * (1.0 - fy);
    t.w01 = (1.0 - fx) * fy;
    t.w11 = fx * fy;
    return t;
  }

  Vec2 eval(double x, double y) const {
    const Taps t = taps(x, y);
    return {u[t.i00] * t.w00 + u[t.i10] * t.w10 + u[t.i01] * t.w01 + u[t.i11] * t.w11,
            v[t.i00] * t.w00 + v[t.i10] * t.w10 + v[t.i01] * t.w01 + v[t.i11] * t.w11};
  }
};

// 5-point Laplacian on the control grid with replicated borders (missing
// neighbors contribute nothing).
void control_laplacian(const ControlGrid& g, std::vector<double>& lu, std::vector<double>& lv) {
  lu.assign(g.u.size(), 0.0);
  lv.assign(g.v.size(), 0.0);
  for (int y = 0; y < g.ny; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      const int n = y * g.nx + x;
      double su = 0.0, sv = 0.0;
      const auto add = [&](int xx, int yy) {
        const int m = yy * g.nx + xx;
        su += g.u[m] - g.u[n];
        sv += g.v[m] - g.v[n];
      };
      if (x > 0) add(x - 1, y);
      if (x + 1 < g.nx) add(x + 1, y);
      if (y > 0) add(x, y - 1);
      if (y + 1 < g.ny) add(x, y + 1);
      lu[n] = su;
      lv[n] = sv;
    }
  }
}

struct Problem {
  const std::vector<FlowField>* residuals = nullptr;
  const std::vector<BinaryMask>* masks = nullptr;
  int width = 0, height = 0;
  int pairs = 0;  // residual count; fields run 0..pairs
  double lambda = 0.0;

  // Data term: sum over pairs k of masked |F_k(x) + W_k(x) - W_{k+1}(x+F_k(x))|^2,
  // with W_0 and W_pairs identically zero (index 0 and pairs are absent from
  // `vars`, which holds W_1..W_{pairs-1}).
  double objective(const std::vector<ControlGrid>& vars) const {
    double e = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const FlowField& f = (*residuals)[k];
      const BinaryMask& m = (*masks)[k];
      const ControlGrid* wk = k >= 1 ? &vars[k - 1] : nullptr;
      const ControlGrid* wk1 = k + 1 <= pairs - 1 ? &vars[k] : nullptr;
      for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
          if (!m.at(i, j)) continue;
          const std::size_t p = f.idx(i, j);
          double ru = f.u[p];
          double rv = f.v[p];
          if (wk) {
            const Vec2 w = wk->eval(j, i);
            ru += w.x;
            rv += w.y;
          }
          if (wk1) {
            const Vec2 w = wk1->eval(j + f.u[p], i + f.v[p]);
            ru -= w.x;
            rv -= w.y;
          }
          e += ru * ru + rv * rv;
        }
      }
    }
    std::vector<double> lu, lv;
    for (const ControlGrid& g : vars) {
      control_laplacian(g, lu, lv);
      for (std::size_t i = 0; i < lu.size(); ++i) e += lambda * (lu[i] * lu[i] + lv[i] * lv[i]);
    }
    return e;
  }

  // Analytic gradient of the objective with respect to the control-node
  // values of each interior field.
  void gradient(const std::vector<ControlGrid>& vars, std::vector<ControlGrid>& grads) const {
    for (std::size_t g = 0; g < vars.size(); ++g) {
      grads[g].nx = vars[g].nx;
      grads[g].ny = vars[g].ny;
      grads[g].stride = vars[g].stride;
      grads[g].u.assign(vars[g].u.size(), 0.0);
      grads[g].v.assign(vars[g].v.size(), 0.0);
    }
    for (int k = 0; k < pairs; ++k) {
      const FlowField& f = (*residuals)[k];
      const BinaryMask& m = (*masks)[k];
      const ControlGrid* wk = k >= 1 ? &vars[k - 1] : nullptr;
      const ControlGrid* wk1 = k + 1 <= pairs - 1 ? &vars[k] : nullptr;
      ControlGrid* gk = k >= 1 ? &grads[k - 1] : nullptr;
      ControlGrid* gk1 = k + 1 <= pairs - 1 ? &grads[k] : nullptr;
      for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
          if (!m.at(i, j)) continue;
          const std::size_t p = f.idx(i, j);
          double ru = f.u[p];
          double rv = f.v[p];
          ControlGrid::Taps tk{}, tk1{};
          if (wk) {
            tk = wk->taps(j, i);
            ru += wk->u[tk.i00] * tk.w00 + wk->u[tk.i10] * tk.w10 + wk->u[tk.i01] * tk.w01 +
                  wk->u[tk.i11] * tk.w11;
            rv += wk->v[tk.i00] * tk.w00 + wk->v[tk.i10] * tk.w10 + wk->v[tk.i01] * tk.w01 +
                  wk->v[tk.i11] * tk.w11;
          }
          if (wk1) {
            tk1 = wk1->taps(j + f.u[p], i + f.v[p]);
            ru -= wk1->u[tk1.i00] * tk1.w00 + wk1->u[tk1.i10] * tk1.w10 +
                  wk1->u[tk1.i01] * tk1.w01 + wk1->u[tk1.i11] * tk1.w11;
            rv -= wk1->v[tk1.i00] * tk1.w00 + wk1->v[tk1.i10] * tk1.w10 +
                  wk1->v[tk1.i01] * tk1.w01 + wk1->v[tk1.i11] * tk1.w11;
          }
          const double gu = 2.0 * ru;
          const double gv = 2.0 * rv;
          if (gk) {
            gk->u[tk.i00] += gu * tk.w00;
            gk->u[tk.i10] += gu * tk.w10;
            gk->u[tk.i01] += gu * tk.w01;
            gk->u[tk.i11] += gu * tk.w11;
            gk->v[tk.i00] += gv * tk.w00;
            gk->v[tk.i10] += gv * tk.w10;
            gk->v[tk.i01] += gv * tk.w01;
            gk->v[tk.i11] += gv * tk.w11;
          }
          if (gk1) {
            gk1->u[tk1.i00] -= gu * tk1.w00;
            gk1->u[tk1.i10] -= gu * tk1.w10;
            gk1->u[tk1.i01] -= gu * tk1.w01;
            gk1->u[tk1.i11] -= gu * tk1.w11;
            gk1->v[tk1.i00] -= gv * tk1.w00;
            gk1->v[tk1.i10] -= gv * tk1.w10;
            gk1->v[tk1.i01] -= gv * tk1.w01;
            gk1->v[tk1.i11] -= gv * tk1.w11;
          }
        }
      }
    }
    // Regularizer gradient: 2*lambda * L(L w) since the replicated-border
    // Laplacian matrix is symmetric.
    std::vector<double> lu, lv, llu, llv;
    for (std::size_t g = 0; g < vars.size(); ++g) {
      control_laplacian(vars[g], lu, lv);
      ControlGrid tmp = vars[g];
      tmp.u = lu;
      tmp.v = lv;
      control_laplacian(tmp, llu, llv);
      for (std::size_t i = 0; i < llu.size(); ++i) {
        grads[g].u[i] += 2.0 * lambda * llu[i];
        grads[g].v[i] += 2.0 * lambda * llv[i];
      }
    }
  }
};

}  // namespace

FlowField residual_pair_flow(const AlignMatrix& align_k, const AlignMatrix& align_k1,
                             const FlowField& pair_flow) {
  if (pair_flow.width < 2 || pair_flow.height < 2) {
    throw invalid_argument("residual_pair_flow: flow dims must be >= 2");
  }
  if (std::abs(det2(align_k)) < 1e-12 || std::abs(det2(align_k1)) < 1e-12) {
    throw invalid_argument("residual_pair_flow: singular alignment transform");
  }
  const int w = pair_flow.width, h = pair_flow.height;
  const double sx = 2.0 / (w - 1), sy = 2.0 / (h - 1);
  // Normalizing transform N: pixel -> [-1, 1]^2, and its inverse.
  Affine23 n{{{sx, 0.0, -1.0}, {0.0, sy, -1.0}}};
  Affine23 ninv{{{1.0 / sx, 0.0, (w - 1) / 2.0}, {0.0, 1.0 / sy, (h - 1) / 2.0}}};
  const Affine23 ak = mul(n, mul(from_align(align_k), ninv));
  const Affine23 ak1 = mul(n, mul(from_align(align_k1), ninv));

  FlowField out(w, h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t p = pair_flow.idx(i, j);
      const Vec2 vn{j * sx - 1.0, i * sy - 1.0};
      const Vec2 yn{pair_flow.u[p] * sx, pair_flow.v[p] * sy};
      const Vec2 a = apply23(ak1, Vec2{vn.x + yn.x, vn.y + yn.y});
      const Vec2 b = apply23(ak, vn);
      out.u[p] = (a.x - b.x) / sx;
      out.v[p] = (a.y - b.y) / sy;
    }
  }
  return out;
}

WarpSolveResult solve_warp_fields(const std::vector<FlowField>& residuals,
                                  const std::vector<BinaryMask>& masks,
                                  const WarpSolveConfig& cfg) {
  if (residuals.empty()) throw invalid_argument("solve_warp_fields: no residual flows");
  if (residuals.size() != masks.size()) {
    throw invalid_argument("solve_warp_fields: residual and mask counts differ");
  }
  if (cfg.grid_stride < 4) throw invalid_argument("solve_warp_fields: grid_stride must be >= 4");
  if (cfg.iters < 0) throw invalid_argument("solve_warp_fields: iters must be >= 0");
  if (!(cfg.step > 0.0)) throw invalid_argument("solve_warp_fields: step must be > 0");
  if (cfg.lambda_reg < 0.0) {
    throw invalid_argument("solve_warp_fields: lambda_reg must be >= 0");
  }
  const int w = residuals[0].width, h = residuals[0].height;
  for (const FlowField& f : residuals) {
    if (f.width != w || f.height != h) {
      throw invalid_argument("solve_warp_fields: residual dims differ");
    }
  }
  std::size_t mask_px = 0;
  for (const BinaryMask& m : masks) {
    if (m.width != w || m.height != h) {
      throw invalid_argument("solve_warp_fields: mask dims differ");
    }
    mask_px += m.count();
  }

  const int pairs = static_cast<int>(residuals.size());
  WarpSolveResult res;
  res.fields.assign(pairs + 1, FlowField(w, h));  // zero-initialized

  if (mask_px == 0) {
    res.empty_masks = true;
    return res;
  }
  if (pairs < 2) {
    // No interior frame to warp; boundary fields are pinned to zero.
    Problem prob{&residuals, &masks, w, h, pairs, cfg.lambda_reg};
    res.objective_initial = res.objective_final = prob.objective({});
    return res;
  }

  Problem prob{&residuals, &masks, w, h, pairs, cfg.lambda_reg};
  std::vector<ControlGrid> vars(pairs - 1);
  for (ControlGrid& g : vars) g.init(w, h, cfg.grid_stride);

  double energy = prob.objective(vars);
  res.objective_initial = energy;

  std::vector<ControlGrid> grads(vars.size());
  std::vector<ControlGrid> trial = vars;
  double step = cfg.step;
  int it = 0;
  for (; it < cfg.iters; ++it) {
    prob.gradient(vars, grads);
    double gnorm2 = 0.0;
    for (const ControlGrid& g : grads) {
      for (double x : g.u) gnorm2 += x * x;
      for (double x : g.v) gnorm2 += x * x;
    }
    if (gnorm2 < 1e-24) break;

    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (std::size_t g = 0; g < vars.size(); ++g) {
        trial[g] = vars[g];
        for (std::size_t i = 0; i < trial[g].u.size(); ++i) {
          trial[g].u[i] -= step * grads[g].u[i];
          trial[g].v[i] -= step * grads[g].v[i];
        }
      }
      const double trial_energy = prob.objective(trial);
      if (trial_energy <= energy) {
        std::swap(vars, trial);
        energy = trial_energy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (res.objective_initial > 0.0 && energy < 1e-14 * res.objective_initial) break;
    step = std::min(step * 1.2, 1e6);
  }
  res.iters_run = it;
  res.objective_final = energy;

  for (int k = 1; k <= pairs - 1; ++k) {
    const ControlGrid& g = vars[k - 1];
    FlowField& f = res.fields[k];
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const Vec2 val = g.eval(j, i);
        const std::size_t p = f.idx(i, j);
        f.u[p] = val.x;
        f.v[p] = val.y;
      }
    }
  }
  return res;
}

std::vector<Frame> apply_warps(const std::vector<Frame>& frames,
                               const std::vector<AlignMatrix>& aligns,
                               const std::vector<FlowField>& warps) {
  if (frames.size() != aligns.size() || frames.size() != warps.size()) {
    throw invalid_argument("apply_warps: frames, aligns, and warps must have equal counts");
  }
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Frame& src = frames[k];
    if (warps[k].width != src.width || warps[k].height != src.height) {
      throw invalid_argument("apply_warps: warp field dims differ from frame dims");
    }
    const AlignMatrix inv = [&] {
      const double d = det2(aligns[k]);
      if (std::abs(d) < 1e-15) throw numeric_error("apply_warps: singular alignment transform");
      AlignMatrix r;
      r.a[0][0] = aligns[k].a[1][1] / d;
      r.a[0][1] = -aligns[k].a[0][1] / d;
      r.a[1][0] = -aligns[k].a[1][0] / d;
      r.a[1][1] = aligns[k].a[0][0] / d;
      r.a[0][2] = -(r.a[0][0] * aligns[k].a[0][2] + r.a[0][1] * aligns[k].a[1][2]);
      r.a[1][2] = -(r.a[1][0] * aligns[k].a[0][2] + r.a[1][1] * aligns[k].a[1][2]);
      return r;
    }();
    FlowField flow(src.width, src.height);
    for (int i = 0; i < src.height; ++i) {
      for (int j = 0; j < src.width; ++j) {
        const std::size_t p = flow.idx(i, j);
        const Vec2 q{j + warps[k].u[p], i + warps[k].v[p]};
        const Vec2 s = apply(inv, q);
        flow.u[p] = s.x - j;
        flow.v[p] = s.y - i;
      }
    }
    out.push_back(warp_frame(src, flow));
  }
  return out;
}

}  // namespace ffstab::fine
