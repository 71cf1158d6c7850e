// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aams/attention.hpp"
#include "aams/codec.hpp"
#include "aams/error.hpp"
#include "aams/fusion.hpp"
#include "aams/kernels.hpp"
#include "aams/metrics.hpp"
#include "aams/style_swap.hpp"
#include "aams/tensor.hpp"
#include "aams/transforms.hpp"
#include "aams/weights.hpp"

namespace aams {

inline constexpr int kDefaultMaxSide = 512;

// K = 1 uses the full-resolution style; K >= 2 spaces the coefficients
// evenly over [0.5, 1], which gives (0.5, 1) for the default K = 2.
inline std::vector<double> default_betas(int strokes) {
  if (strokes <= 0) return {};
  if (strokes == 1) return {1.0};
  std::vector<double> betas(static_cast<std::size_t>(strokes));
  for (int k = 0; k < strokes; ++k) betas[static_cast<std::size_t>(k)] = 0.5 + 0.5 * k / (strokes - 1);
  return betas;
}

struct StylizeConfig {
  int strokes = 2;  // K swapped strokes; K + 1 strokes are fused
  std::vector<double> betas = {0.5, 1.0};
  double gamma = kDefaultGamma;
  double sigma = kDefaultAttentionSigma;
  int patch = kDefaultPatchSize;
  int max_side = kDefaultMaxSide;

  void validate() const {
    if (strokes < 0) throw ConfigurationError("stroke count must be non-negative");
    if (betas.size() != static_cast<std::size_t>(strokes))
      throw ConfigurationError(detail::concat(betas.size(), " scale coefficients given for ", strokes, " strokes"));
    for (double b : betas)
      if (!(b > 0.0)) throw ConfigurationError(detail::concat("scale coefficient ", b, " must be positive"));
    if (!(gamma >= 0.0)) throw ConfigurationError("gamma must be non-negative");
    if (!(sigma >= 0.0)) throw ConfigurationError("sigma must be non-negative");
    if (patch < 1 || patch % 2 == 0) throw ConfigurationError("patch size must be odd and positive");
    if (max_side < 8) throw ConfigurationError("max side must be at least 8");
  }
};

struct StageTimes {
  double encode = 0.0;
  double attention = 0.0;
  double whiten = 0.0;
  double swaps = 0.0;
  double fusion = 0.0;
  double color = 0.0;
  double decode = 0.0;

  double sum() const { return encode + attention + whiten + swaps + fusion + color + decode; }
};

struct RenderReport {
  StageTimes stages;
  double total_seconds = 0.0;
  int strokes = 0;  // K actually used
  int height = 0;
  int width = 0;
  std::vector<std::string> warnings;
};

// Proportional downscale so the longer side is at most `max_side`, then a
// center crop to multiples of 8.
inline Tensor fit_to_grid(const Tensor& image, int max_side) {
  Tensor out = image;
  const int longest = std::max(image.height(), image.width());
  if (longest > max_side) {
    const double s = static_cast<double>(max_side) / longest;
    const int h = std::max(1, static_cast<int>(std::lround(image.height() * s)));
    const int w = std::max(1, static_cast<int>(std::lround(image.width() * s)));
    out = resize_bilinear_to(image, h, w);
    for (float& v : out.data()) v = std::min(1.0f, std::max(0.0f, v));
  }
  const int h8 = out.height() / 8 * 8, w8 = out.width() / 8 * 8;
  if (h8 == 0 || w8 == 0)
    throw DimensionError("image " + out.shape_string() + " is smaller than 8x8 after sizing");
  if (h8 == out.height() && w8 == out.width()) return out;
  const int y0 = (out.height() - h8) / 2, x0 = (out.width() - w8) / 2;
  Tensor cropped(out.channels(), h8, w8);
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < h8; ++y)
      for (int x = 0; x < w8; ++x) cropped(c, y, x) = out(c, y0 + y, x0 + x);
  return cropped;
}

// Everything the transfer needs from one style image; reusable across content images.
struct StyleFeatures {
  EncoderTaps taps;
  Whitened white;
};

inline StyleFeatures prepare_style(const Tensor& style_image, const WeightBundle& bundle, int max_side = kDefaultMaxSide,
                                   StageTimes* times = nullptr) {
  StyleFeatures s;
  auto t0 = std::chrono::steady_clock::now();
  try {
    s.taps = encode(fit_to_grid(style_image, max_side), bundle);
  } catch (const Error& e) {
    rethrow_with_context(e, "encode style");
  }
  auto t1 = std::chrono::steady_clock::now();
  try {
    s.white = whiten(s.taps.relu4_1);
  } catch (const Error& e) {
    rethrow_with_context(e, "whiten style");
  }
  auto t2 = std::chrono::steady_clock::now();
  if (times) {
    times->encode += std::chrono::duration<double>(t1 - t0).count();
    times->whiten += std::chrono::duration<double>(t2 - t1).count();
  }
  return s;
}

struct StylizeResult {
  Tensor image;
  RenderReport report;
  AttentionMap attention;
  ClusterResult clusters;
  WeightMaps weights;
};

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_with_context(e, name);
  }
}

inline std::size_t distinct_count(std::span<const float> values) {
  return std::set<float>(values.begin(), values.end()).size();
}

}  // namespace detail

// Full transfer against a prepared style.
inline StylizeResult stylize(const Tensor& content_image, const StyleFeatures& style, const WeightBundle& bundle,
                             const StylizeConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  detail::Stopwatch clock;
  StylizeResult out;
  RenderReport& report = out.report;

  const Tensor content = detail::stage("size content", [&] { return fit_to_grid(content_image, cfg.max_side); });
  report.height = content.height();
  report.width = content.width();
  clock.lap();

  const EncoderTaps taps = detail::stage("encode content", [&] { return encode(content, bundle); });
  const Tensor& fc = taps.relu4_1;
  report.stages.encode = clock.lap();

  out.attention = detail::stage("attention", [&] {
    const AttentionFeature a = attention_feature(fc, AttentionParams::from_bundle(bundle));
    return attention_filter(a, cfg.sigma);
  });
  report.stages.attention = clock.lap();

  int strokes = cfg.strokes;
  std::vector<double> betas = cfg.betas;
  const std::size_t distinct = detail::distinct_count(out.attention.values());
  if (static_cast<std::size_t>(strokes) + 1 > distinct) {
    report.warnings.push_back(detail::concat("attention map has ", distinct, " distinct values, fewer than ",
                                             strokes + 1, " strokes; falling back to a single stroke"));
    strokes = 0;
    betas.clear();
  }
  report.strokes = strokes;

  const Whitened content_white = detail::stage("whiten content", [&] { return whiten(fc); });
  report.stages.whiten = clock.lap();

  StrokeSet stroke_set = detail::stage("style swap", [&] {
    std::vector<Tensor> swapped = multi_scale_swap(content_white.white, style.white.white, betas, cfg.patch);
    return build_stroke_set(content_white.white, std::move(swapped), betas);
  });
  report.stages.swaps = clock.lap();

  const Tensor fused = detail::stage("fusion", [&] {
    out.clusters = kmeans_1d(out.attention, strokes + 1);
    out.weights = stroke_weight_maps(out.attention, out.clusters, cfg.gamma);
    return fuse(stroke_set, out.weights);
  });
  report.stages.fusion = clock.lap();

  const Tensor colored = detail::stage("color", [&] { return color(fused, style.white.stats); });
  report.stages.color = clock.lap();

  out.image = detail::stage("decode", [&] { return decode(colored, bundle, style.taps); });
  report.stages.decode = clock.lap();
  report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

// Encodes content and style, whitens both, swaps at every scale, fuses under
// the attention map, colors with the style statistics and decodes with
// style-enhanced skip connections.
inline StylizeResult stylize(const Tensor& content_image, const Tensor& style_image, const WeightBundle& bundle,
                             const StylizeConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  StageTimes style_times;
  const StyleFeatures style = prepare_style(style_image, bundle, cfg.max_side, &style_times);
  StylizeResult out = stylize(content_image, style, bundle, cfg);
  out.report.stages.encode += style_times.encode;
  out.report.stages.whiten += style_times.whiten;
  out.report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

struct ReconstructResult {
  Tensor image;
  AttentionFeature attention;
  LossParts parts;
  double total = 0.0;
};

// encode -> self-attention -> O = A (.) f + f -> plain decode, with the
// training losses evaluated on the result.
inline ReconstructResult reconstruct(const Tensor& image, const WeightBundle& bundle,
                                     const LossWeights& weights = {}) {
  ReconstructResult out;
  const EncoderTaps taps = detail::stage("encode", [&] { return encode(image, bundle); });
  out.attention = detail::stage(
      "attention", [&] { return attention_feature(taps.relu4_1, AttentionParams::from_bundle(bundle)); });
  const AttentionOutput o = attention_output(taps.relu4_1, out.attention);
  out.image = detail::stage("decode", [&] { return decode(o.output, bundle); });
  out.parts.content = content_loss(out.image, image, bundle, weights);
  out.parts.attention = attention_sparse_loss(out.attention);
  out.parts.tv = tv_loss(out.image);
  out.total = total_loss(out.parts, weights);
  return out;
}

struct SweepGrid {
  std::vector<double> gammas = {kDefaultGamma};
  std::vector<int> strokes = {2};
  std::vector<double> sigmas = {kDefaultAttentionSigma};
};

struct SweepCell {
  double gamma = 0.0;
  int strokes = 0;
  double sigma = 0.0;
  StylizeResult result;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // row-major: (strokes, sigma) rows, gamma columns
  Tensor montage;
  int rows = 0;
  int cols = 0;
};

// One stylize call per (strokes, sigma, gamma) cell against a single prepared
// style. Cells with K = cfg.strokes keep cfg.betas; others use default_betas(K).
inline SweepResult sweep(const Tensor& content, const Tensor& style_image, const WeightBundle& bundle,
                         const SweepGrid& grid, const StylizeConfig& base = {}) {
  if (grid.gammas.empty() || grid.strokes.empty() || grid.sigmas.empty())
    throw ConfigurationError("sweep grid must have at least one value per axis");
  base.validate();
  const StyleFeatures style = prepare_style(style_image, bundle, base.max_side);
  SweepResult out;
  out.rows = static_cast<int>(grid.strokes.size() * grid.sigmas.size());
  out.cols = static_cast<int>(grid.gammas.size());
  for (int k : grid.strokes)
    for (double sigma : grid.sigmas)
      for (double gamma : grid.gammas) {
        StylizeConfig cfg = base;
        cfg.strokes = k;
        cfg.betas = k == base.strokes ? base.betas : default_betas(k);
        cfg.gamma = gamma;
        cfg.sigma = sigma;
        out.cells.push_back({gamma, k, sigma, stylize(content, style, bundle, cfg)});
      }
  const Tensor& first = out.cells.front().result.image;
  const int h = first.height(), w = first.width();
  out.montage = Tensor(first.channels(), h * out.rows, w * out.cols);
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const Tensor& img = out.cells[i].result.image;
    const int r = static_cast<int>(i) / out.cols, col = static_cast<int>(i) % out.cols;
    for (int c = 0; c < img.channels(); ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.montage(c, r * h + y, col * w + x) = img(c, y, x);
  }
  return out;
}

inline constexpr const char* kReportCsvHeader =
    "gamma,strokes,sigma,height,width,encode_s,attention_s,whiten_s,swaps_s,fusion_s,color_s,decode_s,total_s";

inline std::string report_csv_row(double gamma, double sigma, const RenderReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%g,%d,%g,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", gamma, r.strokes, sigma,
                r.height, r.width, r.stages.encode, r.stages.attention, r.stages.whiten, r.stages.swaps,
                r.stages.fusion, r.stages.color, r.stages.decode, r.total_seconds);
  return buf;
}

inline std::string sweep_csv(const SweepResult& result) {
  std::string csv = std::string(kReportCsvHeader) + "\n";
  for (const SweepCell& cell : result.cells) csv += report_csv_row(cell.gamma, cell.sigma, cell.result.report) + "\n";
  return csv;
}

}  // namespace aams
