// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/pipeline/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ffstab/core/error.hpp"

namespace ffstab::pipeline {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw invalid_argument("config: key '" + key + "' expects an unsigned integer, got '" + v +
                           "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

const char* provider_name(Provider p) {
  return p == Provider::kOracle ? "oracle" : "classical";
}

Provider provider_from_name(const std::string& name) {
  if (name == "oracle") return Provider::kOracle;
  if (name == "classical") return Provider::kClassical;
  throw invalid_argument("config: unknown provider '" + name + "' (expected oracle|classical)");
}

void apply_config_line(PipelineConfig& cfg, const std::string& section, const std::string& key,
                       const std::string& value) {
  const auto unknown = [&]() -> void {
    throw invalid_argument("config: unknown key '" + key + "' in section [" + section + "]");
  };
  if (section == "pipeline") {
    if (key == "workers") cfg.workers = to_int(key, value);
    else if (key == "provider") cfg.provider = provider_from_name(value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "fine_window") cfg.fine_window = to_int(key, value);
    else if (key == "outpaint_neighbors") cfg.outpaint_neighbors = to_int(key, value);
    else if (key == "fixpoint_iters") cfg.fixpoint_iters = to_int(key, value);
    else unknown();
  } else if (section == "synth") {
    auto& s = cfg.synth;
    if (key == "n_frames") s.n_frames = to_int(key, value);
    else if (key == "theta_max_deg") s.theta_max_deg = to_double(key, value);
    else if (key == "s_min") s.s_min = to_double(key, value);
    else if (key == "s_max") s.s_max = to_double(key, value);
    else if (key == "t_max_x") s.t_max_x = to_double(key, value);
    else if (key == "t_max_y") s.t_max_y = to_double(key, value);
    else if (key == "p_max_x") s.p_max_x = to_double(key, value);
    else if (key == "p_max_y") s.p_max_y = to_double(key, value);
    else if (key == "jitter_theta_max_deg") s.jitter_theta_max_deg = to_double(key, value);
    else if (key == "jitter_s") s.jitter_s = to_double(key, value);
    else if (key == "jitter_t_max_x") s.jitter_t_max_x = to_double(key, value);
    else if (key == "jitter_t_max_y") s.jitter_t_max_y = to_double(key, value);
    else if (key == "unstable_p_min") s.unstable_p_min = to_double(key, value);
    else if (key == "unstable_p_max") s.unstable_p_max = to_double(key, value);
    else if (key == "jitter_walk") s.jitter_walk = to_bool(key, value);
    else if (key == "crop_width") s.crop_width = to_int(key, value);
    else if (key == "crop_height") s.crop_height = to_int(key, value);
    else if (key == "n_objects_max") s.n_objects_max = to_int(key, value);
    else if (key == "rng_seed") s.rng_seed = to_u64(key, value);
    else unknown();
  } else if (section == "maskprop") {
    auto& m = cfg.maskprop;
    if (key == "start") m.start = to_int(key, value);
    else if (key == "interval") m.interval = to_int(key, value);
    else if (key == "delta_c") m.delta_c = to_double(key, value);
    else if (key == "samples") m.samples = to_int(key, value);
    else unknown();
  } else if (section == "coarse") {
    auto& p = cfg.pose;
    if (key == "max_iters") p.max_iters = to_int(key, value);
    else if (key == "tol") p.tol = to_double(key, value);
    else if (key == "huber_delta") p.huber_delta = to_double(key, value);
    else unknown();
  } else if (section == "smooth") {
    auto& s = cfg.smooth;
    if (key == "window") s.window = to_int(key, value);
    else if (key == "sigma") s.sigma = to_double(key, value);
    else unknown();
  } else if (section == "fine") {
    auto& f = cfg.fine;
    if (key == "grid_stride") f.grid_stride = to_int(key, value);
    else if (key == "iters") f.iters = to_int(key, value);
    else if (key == "step") f.step = to_double(key, value);
    else if (key == "lambda_reg") f.lambda_reg = to_double(key, value);
    else unknown();
  } else if (section == "outpaint") {
    auto& o = cfg.outpaint;
    if (key == "delta_d") o.delta_d = to_double(key, value);
    else if (key == "delta_d_literal") o.delta_d_literal = to_double(key, value);
    else if (key == "eta_t") o.eta_t = to_int(key, value);
    else if (key == "k_tin") o.k_tin = to_int(key, value);
    else if (key == "eta_u") o.eta_u = to_double(key, value);
    else if (key == "eta_r") o.eta_r = to_double(key, value);
    else if (key == "eta_s") o.eta_s = to_double(key, value);
    else if (key == "delta_r") o.delta_r = to_double(key, value);
    else if (key == "literal_alg3") o.literal_alg3 = to_bool(key, value);
    else if (key == "crop_ratio") o.crop_ratio = to_double(key, value);
    else if (key == "ref_width") o.ref_width = to_int(key, value);
    else if (key == "ref_height") o.ref_height = to_int(key, value);
    else unknown();
  } else {
    throw invalid_argument("config: unknown section [" + section + "]");
  }
}

PipelineConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw invalid_argument("config: malformed line " + std::to_string(line_no) + " in " + path);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw invalid_argument("config: key '" + key + "' appears before any [section] in " + path);
    }
    apply_config_line(cfg, section, key, value);
  }
  return cfg;
}

std::string config_text(const PipelineConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[pipeline]\n";
  os << "workers = " << cfg.workers << "\n";
  os << "provider = " << provider_name(cfg.provider) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "fine_window = " << cfg.fine_window << "\n";
  os << "outpaint_neighbors = " << cfg.outpaint_neighbors << "\n";
  os << "fixpoint_iters = " << cfg.fixpoint_iters << "\n";
  os << "\n[synth]\n";
  const auto& s = cfg.synth;
  os << "n_frames = " << s.n_frames << "\n";
  os << "theta_max_deg = " << s.theta_max_deg << "\n";
  os << "s_min = " << s.s_min << "\n";
  os << "s_max = " << s.s_max << "\n";
  os << "t_max_x = " << s.t_max_x << "\n";
  os << "t_max_y = " << s.t_max_y << "\n";
  os << "p_max_x = " << s.p_max_x << "\n";
  os << "p_max_y = " << s.p_max_y << "\n";
  os << "jitter_theta_max_deg = " << s.jitter_theta_max_deg << "\n";
  os << "jitter_s = " << s.jitter_s << "\n";
  os << "jitter_t_max_x = " << s.jitter_t_max_x << "\n";
  os << "jitter_t_max_y = " << s.jitter_t_max_y << "\n";
  os << "unstable_p_min = " << s.unstable_p_min << "\n";
  os << "unstable_p_max = " << s.unstable_p_max << "\n";
  os << "jitter_walk = " << (s.jitter_walk ? "true" : "false") << "\n";
  os << "crop_width = " << s.crop_width << "\n";
  os << "crop_height = " << s.crop_height << "\n";
  os << "n_objects_max = " << s.n_objects_max << "\n";
  os << "rng_seed = " << s.rng_seed << "\n";
  os << "\n[maskprop]\n";
  os << "start = " << cfg.maskprop.start << "\n";
  os << "interval = " << cfg.maskprop.interval << "\n";
  os << "delta_c = " << cfg.maskprop.delta_c << "\n";
  os << "samples = " << cfg.maskprop.samples << "\n";
  os << "\n[coarse]\n";
  os << "max_iters = " << cfg.pose.max_iters << "\n";
  os << "tol = " << cfg.pose.tol << "\n";
  os << "huber_delta = " << cfg.pose.huber_delta << "\n";
  os << "\n[smooth]\n";
  os << "window = " << cfg.smooth.window << "\n";
  os << "sigma = " << cfg.smooth.sigma << "\n";
  os << "\n[fine]\n";
  os << "grid_stride = " << cfg.fine.grid_stride << "\n";
  os << "iters = " << cfg.fine.iters << "\n";
  os << "step = " << cfg.fine.step << "\n";
  os << "lambda_reg = " << cfg.fine.lambda_reg << "\n";
  os << "\n[outpaint]\n";
  const auto& o = cfg.outpaint;
  os << "delta_d = " << o.delta_d << "\n";
  os << "delta_d_literal = " << o.delta_d_literal << "\n";
  os << "eta_t = " << o.eta_t << "\n";
  os << "k_tin = " << o.k_tin << "\n";
  os << "eta_u = " << o.eta_u << "\n";
  os << "eta_r = " << o.eta_r << "\n";
  os << "eta_s = " << o.eta_s << "\n";
  os << "delta_r = " << o.delta_r << "\n";
  os << "literal_alg3 = " << (o.literal_alg3 ? "true" : "false") << "\n";
  os << "crop_ratio = " << o.crop_ratio << "\n";
  os << "ref_width = " << o.ref_width << "\n";
  os << "ref_height = " << o.ref_height << "\n";
  return os.str();
}

void write_config(const std::string& path, const PipelineConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw io_error("config: cannot write " + path);
  out << config_text(cfg);
  if (!out) throw io_error("config: failed writing " + path);
}

}  // namespace ffstab::pipeline
