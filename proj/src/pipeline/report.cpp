// Copyright (c) 2026 ffstab authors
// SPDX-License-Identifier: Apache-2.0

#include "ffstab/pipeline/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ffstab/core/error.hpp"
#include "ffstab/eval/metrics.hpp"

namespace ffstab::pipeline {

namespace {

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw io_error("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) throw io_error("write failed: " + path);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

MetricsReport compute_metrics(const std::vector<Frame>& input, const std::vector<Frame>& output,
                              const std::vector<AlignMatrix>& maps) {
  if (input.empty() || input.size() != output.size()) {
    throw invalid_argument("compute_metrics: input and output sequences must match");
  }
  if (!maps.empty() && maps.size() != output.size()) {
    throw invalid_argument("compute_metrics: one map per frame required");
  }
  MetricsReport r;
  r.cropping_ratio = clamp01(eval::cropping_ratio(input, output));
  r.frame_valid_fraction.reserve(output.size());
  for (const Frame& f : output) {
    const std::size_t total = f.valid.data.size();
    r.frame_valid_fraction.push_back(
        total == 0 ? 0.0 : static_cast<double>(f.valid.count()) / static_cast<double>(total));
  }
  if (maps.empty()) {
    r.frame_distortion.assign(output.size(), 1.0);
    r.distortion_value = 1.0;
  } else {
    r.frame_distortion.reserve(maps.size());
    for (const AlignMatrix& m : maps) r.frame_distortion.push_back(clamp01(eval::frame_distortion(m)));
    r.distortion_value = clamp01(eval::distortion_value(maps));
  }
  if (output.size() >= 32) {
    try {
      r.stability = clamp01(eval::stability_score(output));
    } catch (const std::exception&) {
      r.stability.reset();
    }
  }
  return r;
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::ofstream out = open_text(path);
  out << "metric,value\n";
  out << "cropping_ratio," << num(report.cropping_ratio) << "\n";
  out << "distortion_value," << num(report.distortion_value) << "\n";
  out << "stability," << (report.stability ? num(*report.stability) : std::string()) << "\n";
  out << "\nframe,valid_fraction,distortion\n";
  const std::size_t n = report.frame_valid_fraction.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = i < report.frame_distortion.size() ? report.frame_distortion[i] : 1.0;
    out << i << "," << num(report.frame_valid_fraction[i]) << "," << num(d) << "\n";
  }
  finish(out, path);
}

void write_metrics_text(const std::string& path, const MetricsReport& report) {
  std::ofstream out = open_text(path);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "cropping ratio   %.4f\n", report.cropping_ratio);
  out << buf;
  std::snprintf(buf, sizeof(buf), "distortion value %.4f\n", report.distortion_value);
  out << buf;
  if (report.stability) {
    std::snprintf(buf, sizeof(buf), "stability score  %.4f\n", *report.stability);
    out << buf;
  } else {
    out << "stability score  n/a (needs >= 32 frames)\n";
  }
  out << "frames           " << report.frame_valid_fraction.size() << "\n";
  finish(out, path);
}

void write_trace_csv(const std::string& path, const eval::FixedPointTrace& trace) {
  std::ofstream out = open_text(path);
  out << "iteration,mean_flow,max_theta,max_scale_dev,max_translation\n";
  for (std::size_t i = 0; i < trace.mean_flow.size(); ++i) {
    out << i << "," << num(trace.mean_flow[i]) << "," << num(trace.max_theta[i]) << ","
        << num(trace.max_scale_dev[i]) << "," << num(trace.max_translation[i]) << "\n";
  }
  finish(out, path);
}

namespace {

void svg_panel(std::ostream& out, int oy, const std::string& title,
               const std::vector<double>& values) {
  constexpr int kLeft = 64, kWidth = 540, kTop = 26, kHeight = 120;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  const double vspan = vmax * 1.05;
  out << "<text x=\"" << kLeft << "\" y=\"" << oy + 16
      << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#333\">" << title << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << oy + kTop << "\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" fill=\"none\" stroke=\"#999\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", vmax);
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << oy + kTop + 12
      << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666\" text-anchor=\"end\">" << buf
      << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << oy + kTop + kHeight
      << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666\" text-anchor=\"end\">0</text>\n";
  const std::size_t n = values.size();
  auto px = [&](std::size_t i) {
    return n <= 1 ? kLeft + kWidth / 2.0
                  : kLeft + static_cast<double>(i) * kWidth / static_cast<double>(n - 1);
  };
  auto py = [&](double v) { return oy + kTop + kHeight - (v / vspan) * kHeight; };
  out << "<polyline fill=\"none\" stroke=\"#2266aa\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(i), py(values[i]));
    out << buf;
  }
  out << "\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"#2266aa\"/>\n",
                  px(i), py(values[i]));
    out << buf;
    out << "<text x=\"" << px(i) << "\" y=\"" << oy + kTop + kHeight + 14
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666\" text-anchor=\"middle\">"
        << i << "</text>\n";
  }
}

}  // namespace

void write_trace_svg(const std::string& path, const eval::FixedPointTrace& trace) {
  const struct {
    const char* title;
    const std::vector<double>* values;
  } panels[] = {
      {"mean flow magnitude (px)", &trace.mean_flow},
      {"max |theta| (rad)", &trace.max_theta},
      {"max |s - 1|", &trace.max_scale_dev},
      {"max translation (px)", &trace.max_translation},
  };
  constexpr int kPanelStride = 190;
  std::ofstream out = open_text(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\""
      << kPanelStride * 4 + 20 << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int oy = 10;
  for (const auto& p : panels) {
    svg_panel(out, oy, p.title, *p.values);
    oy += kPanelStride;
  }
  out << "</svg>\n";
  finish(out, path);
}

void write_fusion_table(const std::string& path,
                        const std::vector<std::vector<outpaint::FuseDecision>>& decisions) {
  std::ofstream out = open_text(path);
  out << "# target candidate area_stable area_unstable ratio overlap accepted\n";
  char buf[160];
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    for (std::size_t c = 0; c < decisions[t].size(); ++c) {
      const outpaint::FuseDecision& d = decisions[t][c];
      std::snprintf(buf, sizeof(buf), "%zu %zu %.0f %.0f %.6f %.6f %s\n", t, c, d.area_stable,
                    d.area_unstable, d.ratio, d.overlap, d.accepted ? "yes" : "no");
      out << buf;
    }
  }
  finish(out, path);
}

namespace {

void write_pgm_bytes(const std::string& path, const std::vector<unsigned char>& bytes, int width,
                     int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw io_error("cannot open for writing: " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

}  // namespace

void write_labels_pgm(const std::string& path, const std::vector<std::int8_t>& labels, int width,
                      int height) {
  if (width <= 0 || height <= 0 ||
      labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw invalid_argument("write_labels_pgm: label buffer does not match dimensions");
  }
  std::vector<unsigned char> bytes(labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    // -1 (unstable) dark gray, 0 (match) mid gray, 1 (outside) light gray,
    // 2 (fill) white; anything else black.
    switch (labels[p]) {
      case -1: bytes[p] = 64; break;
      case 0: bytes[p] = 128; break;
      case 1: bytes[p] = 192; break;
      case 2: bytes[p] = 255; break;
      default: bytes[p] = 0; break;
    }
  }
  write_pgm_bytes(path, bytes, width, height);
}

}  // namespace ffstab::pipeline
