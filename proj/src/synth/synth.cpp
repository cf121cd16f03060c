// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ffstab/core/error.hpp"
#include "ffstab/core/grid.hpp"
#include "ffstab/core/rng.hpp"
#include "ffstab/core/warp.hpp"
#include "ffstab/io/image_io.hpp"

namespace fs = std::filesystem;

namespace ffstab::synth {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
// Mover footprints may cover at most this fraction of the frame.
constexpr double kMoverAreaBudget = 0.4;

std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double lattice_value(std::uint64_t seed, int octave, int ch, long xi, long yi) {
  std::uint64_t k = seed;
  k = hash_mix(k ^ (0x100000001b3ull * static_cast<std::uint64_t>(octave + 1)));
  k = hash_mix(k ^ (0xc2b2ae3d27d4eb4full * static_cast<std::uint64_t>(ch + 1)));
  k = hash_mix(k ^ static_cast<std::uint64_t>(xi * 0x27d4eb2f165667c5ll));
  k = hash_mix(k ^ static_cast<std::uint64_t>(yi * 0x9e3779b185ebca87ll));
  return (k >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, int octave, int ch, double x, double y, double cell) {
  const double gx = x / cell, gy = y / cell;
  const long x0 = static_cast<long>(std::floor(gx)), y0 = static_cast<long>(std::floor(gy));
  const double fx = smoothstep(gx - x0), fy = smoothstep(gy - y0);
  const double v00 = lattice_value(seed, octave, ch, x0, y0);
  const double v01 = lattice_value(seed, octave, ch, x0 + 1, y0);
  const double v10 = lattice_value(seed, octave, ch, x0, y0 + 1);
  const double v11 = lattice_value(seed, octave, ch, x0 + 1, y0 + 1);
  return (v00 * (1 - fx) + v01 * fx) * (1 - fy) + (v10 * (1 - fx) + v11 * fx) * fy;
}

Homography translation(double tx, double ty) {
  Homography h;
  h.h[0][2] = tx;
  h.h[1][2] = ty;
  return h;
}

Homography scale_diag(double sx, double sy) {
  Homography h;
  h.h[0][0] = sx;
  h.h[1][1] = sy;
  return h;
}

Homography scale_rot(double theta, double s) {
  Homography h;
  h.h[0][0] = s * std::cos(theta);
  h.h[0][1] = -s * std::sin(theta);
  h.h[1][0] = s * std::sin(theta);
  h.h[1][1] = s * std::cos(theta);
  return h;
}

Homography perspective(double px, double py) {
  Homography h;
  h.h[2][0] = px;
  h.h[2][1] = py;
  return h;
}

struct PathParams {
  double theta = 0.0, s = 1.0, tx = 0.0, ty = 0.0, px = 0.0, py = 0.0;
};

// Stable-path transform in centered crop coordinates. Perspective factors act
// on normalized [-1,1] coordinates; rotation/scale/translation on pixels.
Homography centered_path_transform(const PathParams& p, int crop_w, int crop_h) {
  const Homography n = scale_diag(2.0 / crop_w, 2.0 / crop_h);
  const Homography n_inv = scale_diag(crop_w / 2.0, crop_h / 2.0);
  Homography m = scale_rot(p.theta, p.s);
  m = compose(n, m);
  m = compose(perspective(p.px, p.py), m);
  m = compose(n_inv, m);
  return compose(translation(p.tx, p.ty), m);
}

// Jitter transform in centered crop coordinates; perspective acts on pixels.
Homography centered_jitter_transform(const PathParams& p) {
  Homography m = scale_rot(p.theta, p.s);
  m = compose(perspective(p.px, p.py), m);
  return compose(translation(p.tx, p.ty), m);
}

Homography about_center(const Homography& centered, const Vec2& c) {
  return compose(translation(c.x, c.y), compose(centered, translation(-c.x, -c.y)));
}

// Largest overshoot of the crop's sampling footprint outside the base bounds.
double margin_overshoot(const Homography& frame_to_base, int w, int h, int bw, int bh) {
  double worst = 0.0;
  const double xs[] = {0.0, (w - 1) * 0.5, double(w - 1)};
  const double ys[] = {0.0, (h - 1) * 0.5, double(h - 1)};
  for (double y : ys)
    for (double x : xs) {
      const Vec2 p = apply(frame_to_base, {x, y});
      worst = std::max(worst, 0.0 - p.x);
      worst = std::max(worst, 0.0 - p.y);
      worst = std::max(worst, p.x - (bw - 1));
      worst = std::max(worst, p.y - (bh - 1));
    }
  return worst;
}

void check_margin(const Homography& frame_to_base, const SynthClip& clip, const char* who) {
  const double over = margin_overshoot(frame_to_base, clip.cfg.crop_width, clip.cfg.crop_height,
                                       clip.base.width, clip.base.height);
  if (over > 0.0) {
    std::ostringstream msg;
    msg << who << ": base image too small; enlarge each margin by at least "
        << static_cast<long>(std::ceil(over)) << " px";
    throw invalid_argument(msg.str());
  }
}

Frame render_from_base(const Frame& base, const Homography& frame_to_base, int w, int h) {
  return warp_frame(base, induced_flow(frame_to_base, w, h));
}

PathParams draw_endpoint(Rng& rng, const SynthConfig& cfg) {
  PathParams p;
  p.theta = rng.uniform(-cfg.theta_max_deg, cfg.theta_max_deg) * kDegToRad;
  p.s = rng.uniform(cfg.s_min, cfg.s_max);
  p.tx = rng.uniform(-cfg.t_max_x, cfg.t_max_x);
  p.ty = rng.uniform(-cfg.t_max_y, cfg.t_max_y);
  p.px = rng.uniform(-cfg.p_max_x, cfg.p_max_x);
  p.py = rng.uniform(-cfg.p_max_y, cfg.p_max_y);
  return p;
}

PathParams draw_jitter(Rng& rng, const SynthConfig& cfg) {
  PathParams p;
  p.theta = rng.uniform(-cfg.jitter_theta_max_deg, cfg.jitter_theta_max_deg) * kDegToRad;
  p.s = 1.0 + rng.uniform(-cfg.jitter_s, cfg.jitter_s);
  p.tx = rng.uniform(-cfg.jitter_t_max_x, cfg.jitter_t_max_x);
  p.ty = rng.uniform(-cfg.jitter_t_max_y, cfg.jitter_t_max_y);
  p.px = rng.sign() * rng.uniform(cfg.unstable_p_min, cfg.unstable_p_max);
  p.py = rng.sign() * rng.uniform(cfg.unstable_p_min, cfg.unstable_p_max);
  return p;
}

PathParams interpolate(const PathParams& end, double alpha) {
  PathParams p;
  p.theta = alpha * end.theta;
  p.s = 1.0 + alpha * (end.s - 1.0);
  p.tx = alpha * end.tx;
  p.ty = alpha * end.ty;
  p.px = alpha * end.px;
  p.py = alpha * end.py;
  return p;
}

}  // namespace

Frame make_base_image(int width, int height, std::uint64_t seed, int channels) {
  if (width < 2 || height < 2) throw invalid_argument("make_base_image: dims must be >= 2");
  if (channels != 1 && channels != 3)
    throw invalid_argument("make_base_image: channels must be 1 or 3");
  Frame f(width, height, channels);
  const double cells[] = {96.0, 37.0, 13.0, 5.0};
  const double weights[] = {0.45, 0.3, 0.15, 0.10};
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int ch = 0; ch < channels; ++ch) {
        double v = 0.0;
        // Shared luminance octaves plus one per-channel octave keep channels
        // correlated the way photographs are.
        for (int o = 0; o < 4; ++o) v += weights[o] * value_noise(seed, o, 0, j, i, cells[o]);
        v = 0.8 * v + 0.2 * value_noise(seed, 4, ch, j, i, 23.0);
        f.at(i, j, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return f;
}

void required_base_dims(const SynthConfig& cfg, int& width, int& height) {
  const int w = cfg.crop_width, h = cfg.crop_height;
  double half_x = (w - 1) * 0.5, half_y = (h - 1) * 0.5;
  const double th[] = {-cfg.theta_max_deg * kDegToRad, 0.0, cfg.theta_max_deg * kDegToRad};
  const double sc[] = {cfg.s_min, cfg.s_max};
  const double jt[] = {-cfg.jitter_theta_max_deg * kDegToRad, 0.0,
                       cfg.jitter_theta_max_deg * kDegToRad};
  const double js[] = {1.0 - cfg.jitter_s, 1.0 + cfg.jitter_s};
  for (double theta : th)
    for (double s : sc)
      for (int tsx = -1; tsx <= 1; tsx += 2)
        for (int tsy = -1; tsy <= 1; tsy += 2)
          for (int psx = -1; psx <= 1; psx += 2)
            for (int psy = -1; psy <= 1; psy += 2) {
              PathParams p{theta, s, tsx * cfg.t_max_x, tsy * cfg.t_max_y,
                           psx * cfg.p_max_x, psy * cfg.p_max_y};
              const Homography m = inverse(centered_path_transform(p, w, h));
              for (double jtheta : jt)
                for (double jscale : js) {
                  PathParams jp{jtheta, jscale, cfg.jitter_t_max_x, cfg.jitter_t_max_y,
                                cfg.unstable_p_max, cfg.unstable_p_max};
                  const Homography jm = inverse(centered_jitter_transform(jp));
                  const Homography total = compose(m, jm);
                  const double xs[] = {-(w - 1) * 0.5, 0.0, (w - 1) * 0.5};
                  const double ys[] = {-(h - 1) * 0.5, 0.0, (h - 1) * 0.5};
                  for (double y : ys)
                    for (double x : xs) {
                      const Vec2 q = apply(total, {x, y});
                      half_x = std::max(half_x, std::fabs(q.x));
                      half_y = std::max(half_y, std::fabs(q.y));
                    }
                }
            }
  // Bilinear taps need one extra pixel; round up to even.
  width = 2 * static_cast<int>(std::ceil(half_x)) + 4;
  height = 2 * static_cast<int>(std::ceil(half_y)) + 4;
}

SynthClip gen_stable_video(const Frame& base, const SynthConfig& cfg) {
  if (cfg.n_frames < 2) throw invalid_argument("gen_stable_video: need at least 2 frames");
  if (cfg.crop_width < 2 || cfg.crop_height < 2)
    throw invalid_argument("gen_stable_video: crop dims must be >= 2");
  if (!(cfg.s_min > 0.0 && cfg.s_max >= cfg.s_min))
    throw invalid_argument("gen_stable_video: bad scale range");
  if (base.width < cfg.crop_width || base.height < cfg.crop_height)
    throw invalid_argument("gen_stable_video: base smaller than crop");

  SynthClip clip;
  clip.cfg = cfg;
  clip.base = base;

  Rng rng(cfg.rng_seed);
  const PathParams endpoint = draw_endpoint(rng, cfg);

  const Vec2 cb = frame_center(base.width, base.height);
  const Vec2 cc = frame_center(cfg.crop_width, cfg.crop_height);
  const Homography to_origin = translation(cb.x - cc.x, cb.y - cc.y);

  clip.stable.reserve(cfg.n_frames);
  for (int k = 0; k < cfg.n_frames; ++k) {
    const double alpha = double(k) / (cfg.n_frames - 1);
    const PathParams pk = interpolate(endpoint, alpha);
    const Homography m = about_center(centered_path_transform(pk, cfg.crop_width, cfg.crop_height), cb);
    const Homography frame_to_base = compose(inverse(m), to_origin);
    check_margin(frame_to_base, clip, "gen_stable_video");
    clip.stable.push_back(
        render_from_base(base, frame_to_base, cfg.crop_width, cfg.crop_height));
    clip.stable_to_base.push_back(frame_to_base);
  }
  return clip;
}

void jitter_video(SynthClip& clip) {
  if (clip.stable.empty()) throw invalid_argument("jitter_video: no stable stream");
  if (!clip.object_masks_stable.empty())
    throw invalid_argument("jitter_video: must run before insert_movers");
  const SynthConfig& cfg = clip.cfg;
  // Offset stream keeps jitter draws independent from the path draw.
  Rng rng(cfg.rng_seed ^ 0x6a09e667f3bcc909ull);
  const Vec2 cc = frame_center(cfg.crop_width, cfg.crop_height);
  const int n = static_cast<int>(clip.stable.size());

  clip.unstable.clear();
  clip.unstable_to_base.clear();
  clip.gt_homographies.clear();
  clip.gt_poses.clear();

  Homography walk;  // accumulates when jitter_walk is set
  for (int k = 0; k < n; ++k) {
    Homography jitter;  // identity for the anchor frame
    if (k > 0) {
      const Homography step = about_center(centered_jitter_transform(draw_jitter(rng, cfg)), cc);
      jitter = cfg.jitter_walk ? compose(walk, step) : step;
    }
    walk = jitter;
    const Homography frame_to_base = compose(clip.stable_to_base[k], inverse(jitter));
    check_margin(frame_to_base, clip, "jitter_video");
    clip.unstable.push_back(
        render_from_base(clip.base, frame_to_base, cfg.crop_width, cfg.crop_height));
    clip.unstable_to_base.push_back(frame_to_base);
    clip.gt_homographies.push_back(inverse(jitter));
  }
  for (int k = 0; k + 1 < n; ++k) {
    const Homography pair =
        compose(inverse(clip.unstable_to_base[k + 1]), clip.unstable_to_base[k]);
    clip.gt_poses.push_back(similarity_from_homography(pair, cc));
  }
}

namespace {

struct Sprite {
  std::vector<Vec2> poly;  // convex, local coordinates
  Vec2 pos0, vel;
  double phi0 = 0.0, omega = 0.0;
  double tex_kx[3] = {0, 0, 0}, tex_ky[3] = {0, 0, 0}, tex_phase[3] = {0, 0, 0};
  double tint[3] = {0.5, 0.5, 0.5};
};

bool inside_convex(const std::vector<Vec2>& poly, const Vec2& p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross < 0.0) return false;
  }
  return true;
}

float sprite_texel(const Sprite& s, int ch, const Vec2& p) {
  const double v = s.tint[ch] +
                   0.35 * std::sin(s.tex_kx[ch] * p.x + s.tex_ky[ch] * p.y + s.tex_phase[ch]);
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void render_sprite(Frame& frame, BinaryMask& mask, const Sprite& s,
                   const Homography& local_to_frame) {
  double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
  for (const Vec2& v : s.poly) {
    const Vec2 q = apply(local_to_frame, v);
    min_x = std::min(min_x, q.x);
    min_y = std::min(min_y, q.y);
    max_x = std::max(max_x, q.x);
    max_y = std::max(max_y, q.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(max_x)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(max_y)));
  const Homography frame_to_local = inverse(local_to_frame);
  for (int i = y0; i <= y1; ++i) {
    for (int j = x0; j <= x1; ++j) {
      const Vec2 lp = apply(frame_to_local, {double(j), double(i)});
      if (!inside_convex(s.poly, lp)) continue;
      for (int ch = 0; ch < frame.channels; ++ch)
        frame.at(i, j, ch) = sprite_texel(s, frame.channels == 1 ? 0 : ch, lp);
      mask.set(i, j, true);
    }
  }
}

}  // namespace

void insert_movers(SynthClip& clip) {
  if (clip.stable.empty()) throw invalid_argument("insert_movers: no stable stream");
  if (clip.unstable.empty()) throw invalid_argument("insert_movers: run jitter_video first");
  const SynthConfig& cfg = clip.cfg;
  const int n = static_cast<int>(clip.stable.size());
  const int w = cfg.crop_width, h = cfg.crop_height;

  clip.object_masks_stable.assign(n, BinaryMask(w, h, false));
  clip.object_masks.assign(n, BinaryMask(w, h, false));
  if (cfg.n_objects_max <= 0) return;

  Rng rng(cfg.rng_seed ^ 0xbb67ae8584caa73bull);
  const int count = 1 + static_cast<int>(rng.uniform_index(cfg.n_objects_max));
  // Disk-area budget keeps the per-frame union under the 40% cap.
  const double r_max =
      0.9 * std::sqrt(kMoverAreaBudget * w * h / (count * M_PI));

  std::vector<Sprite> sprites(count);
  for (Sprite& s : sprites) {
    const double r = rng.uniform(0.35, 1.0) * r_max;
    const int verts = 5 + static_cast<int>(rng.uniform_index(4));
    std::vector<double> ang(verts);
    for (double& a : ang) a = rng.uniform(0.0, 2.0 * M_PI);
    std::sort(ang.begin(), ang.end());
    for (int i = 0; i < verts; ++i) {
      const double rr = r * rng.uniform(0.6, 1.0);
      s.poly.push_back({rr * std::cos(ang[i]), rr * std::sin(ang[i])});
    }
    s.pos0 = {rng.uniform(0.2 * w, 0.8 * w), rng.uniform(0.2 * h, 0.8 * h)};
    s.vel = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    s.phi0 = rng.uniform(0.0, 2.0 * M_PI);
    s.omega = rng.uniform(-0.05, 0.05);
    for (int ch = 0; ch < 3; ++ch) {
      s.tex_kx[ch] = rng.uniform(0.15, 0.8);
      s.tex_ky[ch] = rng.uniform(0.15, 0.8);
      s.tex_phase[ch] = rng.uniform(0.0, 2.0 * M_PI);
      s.tint[ch] = rng.uniform(0.3, 0.7);
    }
  }

  for (int k = 0; k < n; ++k) {
    // unstable(x) = stable(J^-1 x) with J^-1 recorded in gt_homographies.
    const Homography stable_to_unstable = inverse(clip.gt_homographies[k]);
    for (const Sprite& s : sprites) {
      Homography pose = compose(
          translation(s.pos0.x + s.vel.x * k, s.pos0.y + s.vel.y * k),
          scale_rot(s.phi0 + s.omega * k, 1.0));
      render_sprite(clip.stable[k], clip.object_masks_stable[k], s, pose);
      render_sprite(clip.unstable[k], clip.object_masks[k], s,
                    compose(stable_to_unstable, pose));
    }
  }
}

SynthClip gen_small_fov_pair(const SynthClip& clip, int window_width, int window_height,
                             std::uint64_t seed) {
  if (clip.stable.empty()) throw invalid_argument("gen_small_fov_pair: empty clip");
  const int w = clip.cfg.crop_width, h = clip.cfg.crop_height;
  if (window_width > w || window_height > h || window_width < 2 || window_height < 2)
    throw invalid_argument("gen_small_fov_pair: window must fit inside the frame");

  const int n = static_cast<int>(clip.stable.size());
  Rng rng(seed);
  SynthClip out = clip;
  out.fov_width = window_width;
  out.fov_height = window_height;
  out.fov_origin.resize(n);

  double ox = (w - window_width) * 0.5;
  double oy = (h - window_height) * 0.5;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      ox += rng.uniform(-3.0, 3.0);
      oy += rng.uniform(-3.0, 3.0);
      ox = std::clamp(ox, 0.0, double(w - window_width));
      oy = std::clamp(oy, 0.0, double(h - window_height));
    }
    const int ix = static_cast<int>(std::lround(ox));
    const int iy = static_cast<int>(std::lround(oy));
    out.fov_origin[k] = {double(ix), double(iy)};
    auto mask_stream = [&](Frame& f) {
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const bool in = j >= ix && j < ix + window_width && i >= iy && i < iy + window_height;
          if (!in) {
            for (int ch = 0; ch < f.channels; ++ch) f.at(i, j, ch) = 0.0f;
            f.valid.set(i, j, false);
          }
        }
    };
    mask_stream(out.stable[k]);
    if (!out.unstable.empty()) mask_stream(out.unstable[k]);
  }
  return out;
}

namespace {

void write_homography_rows(std::ostream& os, const char* section,
                           const std::vector<Homography>& hs) {
  os << "[" << section << "]\n";
  for (std::size_t k = 0; k < hs.size(); ++k) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%zu %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", k,
                  hs[k].h[0][0], hs[k].h[0][1], hs[k].h[0][2], hs[k].h[1][0], hs[k].h[1][1],
                  hs[k].h[1][2], hs[k].h[2][0], hs[k].h[2][1], hs[k].h[2][2]);
    os << buf;
  }
}

std::vector<Homography> read_homography_rows(std::istream& is, int count) {
  std::vector<Homography> hs(count);
  for (int k = 0; k < count; ++k) {
    std::size_t idx = 0;
    Homography h;
    is >> idx;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) is >> h.h[i][j];
    if (!is) throw format_error("gt.txt: truncated homography section");
    hs[static_cast<std::size_t>(idx)] = h;
  }
  return hs;
}

std::string frame_path(const std::string& dir, int k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "/%05d.%s", k, ext);
  return dir + buf;
}

}  // namespace

void store_clip(const std::string& dir, const SynthClip& clip, bool write_base) {
  fs::create_directories(dir);
  fs::create_directories(dir + "/stable");
  const int n = static_cast<int>(clip.stable.size());
  for (int k = 0; k < n; ++k) write_image(frame_path(dir + "/stable", k, "png"), clip.stable[k]);
  if (!clip.unstable.empty()) {
    fs::create_directories(dir + "/unstable");
    for (int k = 0; k < n; ++k)
      write_image(frame_path(dir + "/unstable", k, "png"), clip.unstable[k]);
  }
  if (!clip.object_masks.empty()) {
    fs::create_directories(dir + "/object_masks");
    fs::create_directories(dir + "/object_masks_stable");
    for (int k = 0; k < n; ++k) {
      write_mask_pgm(frame_path(dir + "/object_masks", k, "pgm"), clip.object_masks[k]);
      write_mask_pgm(frame_path(dir + "/object_masks_stable", k, "pgm"),
                     clip.object_masks_stable[k]);
    }
  }
  if (write_base && clip.base.width > 0) write_image(dir + "/base.png", clip.base);

  std::ofstream gt(dir + "/gt.txt");
  if (!gt) throw io_error("cannot open " + dir + "/gt.txt");
  gt << "# synthetic clip ground truth\n[config]\n";
  const SynthConfig& c = clip.cfg;
  char buf[256];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    gt << buf;
  };
  gt << "n_frames = " << c.n_frames << "\n";
  kv("theta_max_deg", c.theta_max_deg);
  kv("s_min", c.s_min);
  kv("s_max", c.s_max);
  kv("t_max_x", c.t_max_x);
  kv("t_max_y", c.t_max_y);
  kv("p_max_x", c.p_max_x);
  kv("p_max_y", c.p_max_y);
  kv("jitter_theta_max_deg", c.jitter_theta_max_deg);
  kv("jitter_s", c.jitter_s);
  kv("jitter_t_max_x", c.jitter_t_max_x);
  kv("jitter_t_max_y", c.jitter_t_max_y);
  kv("unstable_p_min", c.unstable_p_min);
  kv("unstable_p_max", c.unstable_p_max);
  gt << "jitter_walk = " << (c.jitter_walk ? 1 : 0) << "\n";
  gt << "crop_width = " << c.crop_width << "\ncrop_height = " << c.crop_height << "\n";
  gt << "n_objects_max = " << c.n_objects_max << "\n";
  gt << "rng_seed = " << c.rng_seed << "\n";
  gt << "frames = " << n << "\n";
  gt << "has_unstable = " << (clip.unstable.empty() ? 0 : 1) << "\n";
  gt << "has_movers = " << (clip.object_masks.empty() ? 0 : 1) << "\n";

  if (!clip.stable_to_base.empty()) write_homography_rows(gt, "stable_to_base", clip.stable_to_base);
  if (!clip.unstable_to_base.empty())
    write_homography_rows(gt, "unstable_to_base", clip.unstable_to_base);
  if (!clip.gt_homographies.empty())
    write_homography_rows(gt, "gt_homographies", clip.gt_homographies);
  if (!clip.gt_poses.empty()) {
    gt << "[gt_poses]\n";
    for (std::size_t k = 0; k < clip.gt_poses.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g %.17g\n", k, clip.gt_poses[k].theta,
                    clip.gt_poses[k].s, clip.gt_poses[k].dx, clip.gt_poses[k].dy);
      gt << buf;
    }
  }
  if (clip.fov_width > 0) {
    gt << "[fov]\nwindow = " << clip.fov_width << " " << clip.fov_height << "\n";
    for (std::size_t k = 0; k < clip.fov_origin.size(); ++k)
      gt << k << " " << clip.fov_origin[k].x << " " << clip.fov_origin[k].y << "\n";
  }
  if (!gt) throw io_error("short write: " + dir + "/gt.txt");
}

SynthClip load_clip(const std::string& dir) {
  std::ifstream gt(dir + "/gt.txt");
  if (!gt) throw io_error("cannot open " + dir + "/gt.txt");
  SynthClip clip;
  SynthConfig& c = clip.cfg;
  int frames = 0, has_unstable = 0, has_movers = 0;

  std::string line;
  while (std::getline(gt, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      if (line == "[config]") continue;
      if (line == "[stable_to_base]")
        clip.stable_to_base = read_homography_rows(gt, frames);
      else if (line == "[unstable_to_base]")
        clip.unstable_to_base = read_homography_rows(gt, frames);
      else if (line == "[gt_homographies]")
        clip.gt_homographies = read_homography_rows(gt, frames);
      else if (line == "[gt_poses]") {
        clip.gt_poses.resize(frames > 0 ? frames - 1 : 0);
        for (auto& p : clip.gt_poses) {
          std::size_t idx;
          gt >> idx >> p.theta >> p.s >> p.dx >> p.dy;
        }
        if (!gt) throw format_error("gt.txt: truncated pose section");
        std::getline(gt, line);
      } else if (line == "[fov]") {
        std::string key;
        gt >> key >> clip.fov_width >> clip.fov_height;
        clip.fov_origin.resize(frames);
        for (auto& o : clip.fov_origin) {
          std::size_t idx;
          gt >> idx >> o.x >> o.y;
        }
        if (!gt) throw format_error("gt.txt: truncated fov section");
        std::getline(gt, line);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string key, eq;
    double val = 0.0;
    ls >> key >> eq >> val;
    if (!ls || eq != "=") throw format_error("gt.txt: malformed line: " + line);
    if (key == "n_frames") c.n_frames = static_cast<int>(val);
    else if (key == "theta_max_deg") c.theta_max_deg = val;
    else if (key == "s_min") c.s_min = val;
    else if (key == "s_max") c.s_max = val;
    else if (key == "t_max_x") c.t_max_x = val;
    else if (key == "t_max_y") c.t_max_y = val;
    else if (key == "p_max_x") c.p_max_x = val;
    else if (key == "p_max_y") c.p_max_y = val;
    else if (key == "jitter_theta_max_deg") c.jitter_theta_max_deg = val;
    else if (key == "jitter_s") c.jitter_s = val;
    else if (key == "jitter_t_max_x") c.jitter_t_max_x = val;
    else if (key == "jitter_t_max_y") c.jitter_t_max_y = val;
    else if (key == "unstable_p_min") c.unstable_p_min = val;
    else if (key == "unstable_p_max") c.unstable_p_max = val;
    else if (key == "jitter_walk") c.jitter_walk = val != 0.0;
    else if (key == "crop_width") c.crop_width = static_cast<int>(val);
    else if (key == "crop_height") c.crop_height = static_cast<int>(val);
    else if (key == "n_objects_max") c.n_objects_max = static_cast<int>(val);
    else if (key == "rng_seed") c.rng_seed = static_cast<std::uint64_t>(val);
    else if (key == "frames") frames = static_cast<int>(val);
    else if (key == "has_unstable") has_unstable = static_cast<int>(val);
    else if (key == "has_movers") has_movers = static_cast<int>(val);
  }

  for (int k = 0; k < frames; ++k)
    clip.stable.push_back(read_image(frame_path(dir + "/stable", k, "png")));
  if (has_unstable)
    for (int k = 0; k < frames; ++k)
      clip.unstable.push_back(read_image(frame_path(dir + "/unstable", k, "png")));
  if (has_movers)
    for (int k = 0; k < frames; ++k) {
      clip.object_masks.push_back(read_mask_pgm(frame_path(dir + "/object_masks", k, "pgm")));
      clip.object_masks_stable.push_back(
          read_mask_pgm(frame_path(dir + "/object_masks_stable", k, "pgm")));
    }
  if (fs::exists(dir + "/base.png")) clip.base = read_image(dir + "/base.png");

  // Rebuild validity for small-FOV clips (PNG carries no validity channel).
  if (clip.fov_width > 0) {
    for (int k = 0; k < frames; ++k) {
      const int ix = static_cast<int>(clip.fov_origin[k].x);
      const int iy = static_cast<int>(clip.fov_origin[k].y);
      auto remask = [&](Frame& f) {
        for (int i = 0; i < f.height; ++i)
          for (int j = 0; j < f.width; ++j)
            f.valid.set(i, j, j >= ix && j < ix + clip.fov_width && i >= iy &&
                                  i < iy + clip.fov_height);
      };
      remask(clip.stable[k]);
      if (has_unstable) remask(clip.unstable[k]);
    }
  }
  return clip;
}

}  // namespace ffstab::synth
