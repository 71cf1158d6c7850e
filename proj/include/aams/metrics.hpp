// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aams/attention.hpp"
#include "aams/codec.hpp"
#include "aams/error.hpp"
#include "aams/tensor.hpp"

namespace aams {

struct LossWeights {
  double lambda_con = 1.0;
  double lambda_p = 10.0;
  double lambda_att = 6.0;
  double lambda_tv = 10.0;
};

struct LossParts {
  double content = 0.0;
  double attention = 0.0;
  double tv = 0.0;
};

inline double mean_squared_difference(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_squared_difference");
  auto x = a.data();
  auto y = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

inline std::vector<Tensor> tap_list(const EncoderTaps& taps) {
  return {taps.relu1_1, taps.relu2_1, taps.relu3_1, taps.relu4_1};
}

// Perceptual MSE summed over the encoder's taps plus lambda_p * pixel MSE.
// `encoder` maps an image to its list of tap activations.
template <typename Encoder>
  requires std::invocable<Encoder&, const Tensor&>
double content_loss(const Tensor& reconstruction, const Tensor& original, Encoder&& encoder,
                    const LossWeights& weights = {}) {
  require_same_shape(reconstruction, original, "content_loss");
  const std::vector<Tensor> a = encoder(reconstruction);
  const std::vector<Tensor> b = encoder(original);
  if (a.size() != b.size()) throw DimensionError("content_loss: encoder tap counts differ");
  double perceptual = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) perceptual += mean_squared_difference(a[l], b[l]);
  return perceptual + weights.lambda_p * mean_squared_difference(reconstruction, original);
}

inline double content_loss(const Tensor& reconstruction, const Tensor& original, const WeightBundle& bundle,
                           const LossWeights& weights = {}) {
  return content_loss(
      reconstruction, original, [&](const Tensor& img) { return tap_list(encode(img, bundle)); }, weights);
}

// Mean absolute value of the attention feature.
inline double attention_sparse_loss(const AttentionFeature& attention) {
  double s = 0.0;
  for (float v : attention.a.data()) s += std::abs(static_cast<double>(v));
  return attention.a.empty() ? 0.0 : s / static_cast<double>(attention.a.size());
}

// Anisotropic squared-difference total variation, averaged over every
// vertical and horizontal neighbour pair of every channel.
inline double tv_loss(const Tensor& image) {
  if (image.plane() < 2 || image.empty())
    throw ValidationError("tv_loss: image needs at least two pixels, got " + image.shape_string());
  double s = 0.0;
  std::size_t pairs = 0;
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x) {
        if (y + 1 < image.height()) {
          const double d = static_cast<double>(image(c, y + 1, x)) - image(c, y, x);
          s += d * d;
          ++pairs;
        }
        if (x + 1 < image.width()) {
          const double d = static_cast<double>(image(c, y, x + 1)) - image(c, y, x);
          s += d * d;
          ++pairs;
        }
      }
  }
  return s / static_cast<double>(pairs);
}

inline double total_loss(const LossParts& parts, const LossWeights& weights = {}) {
  return weights.lambda_con * parts.content + weights.lambda_att * parts.attention + weights.lambda_tv * parts.tv;
}

// Saliency maps for a content image and its stylization. The fixation mask
// (non-zero = fixated) is optional; without it the top decile of the content
// saliency is used.
struct SaliencyPair {
  Tensor content_saliency;
  Tensor stylized_saliency;
  std::optional<Tensor> fixations;
};

struct SaliencyScores {
  double auc_judd = 0.0;
  double sim = 0.0;
  double nss = 0.0;
  double cc = 0.0;
  double kl = 0.0;
};

inline constexpr double kKlEpsilon = 1e-12;
inline constexpr const char* kSaliencyCsvHeader = "auc_judd,sim,nss,cc,kl";

namespace detail {

inline std::vector<double> as_doubles(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

inline std::vector<double> sum_normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0)
    for (double& x : v) x /= s;
  return v;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Mask from the top decile of `map` (values >= the 90th percentile, nearest rank).
inline std::vector<std::uint8_t> top_decile_mask(const std::vector<double>& map) {
  std::vector<double> sorted = map;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(sorted.size())));
  const double threshold = sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
  std::vector<std::uint8_t> mask(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) mask[i] = map[i] >= threshold ? 1 : 0;
  return mask;
}

// ROC area with thresholds at the fixated pixels' scores.
inline double auc_judd(const std::vector<double>& score, const std::vector<std::uint8_t>& mask) {
  std::vector<double> fixated;
  for (std::size_t i = 0; i < score.size(); ++i)
    if (mask[i]) fixated.push_back(score[i]);
  const std::size_t n_fix = fixated.size(), n_pix = score.size();
  if (n_fix == n_pix) return 0.0;
  std::sort(fixated.begin(), fixated.end(), std::greater<>());
  std::vector<double> all = score;
  std::sort(all.begin(), all.end());
  std::vector<double> tp{0.0}, fp{0.0};
  for (std::size_t i = 0; i < n_fix; ++i) {
    const double t = fixated[i];
    const auto above = static_cast<std::size_t>(all.end() - std::lower_bound(all.begin(), all.end(), t));
    tp.push_back(static_cast<double>(i + 1) / static_cast<double>(n_fix));
    fp.push_back(static_cast<double>(above - (i + 1)) / static_cast<double>(n_pix - n_fix));
  }
  tp.push_back(1.0);
  fp.push_back(1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < tp.size(); ++i) area += (fp[i] - fp[i - 1]) * (tp[i] + tp[i - 1]) * 0.5;
  return area;
}

}  // namespace detail

inline SaliencyScores saliency_metrics(const SaliencyPair& pair) {
  const Tensor& content = pair.content_saliency;
  const Tensor& stylized = pair.stylized_saliency;
  require_same_shape(content, stylized, "saliency_metrics");
  if (content.channels() != 1) throw DimensionError("saliency maps must be single-channel");
  for (const Tensor* t : {&content, &stylized})
    for (float v : t->data())
      if (!std::isfinite(v) || v < 0.0f) throw ValidationError("saliency maps must be finite and non-negative");

  const std::vector<double> c = detail::as_doubles(content);
  const std::vector<double> s = detail::as_doubles(stylized);
  std::vector<std::uint8_t> mask;
  if (pair.fixations) {
    require_same_shape(content, *pair.fixations, "saliency_metrics fixations");
    for (float v : pair.fixations->data()) mask.push_back(v != 0.0f ? 1 : 0);
  } else {
    mask = detail::top_decile_mask(c);
  }
  const std::size_t n_fix = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  if (n_fix == 0) throw ValidationError("saliency_metrics: fixation set is empty");

  SaliencyScores out;
  out.cc = detail::pearson(s, c);

  const std::vector<double> p = detail::sum_normalized(s);  // stylized
  const std::vector<double> q = detail::sum_normalized(c);  // content
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.sim += std::min(p[i], q[i]);
    if (q[i] > 0.0) out.kl += q[i] * std::log(q[i] / (p[i] + kKlEpsilon));
  }

  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double sd = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1)) : 0.0;
  if (sd > 0.0) {
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask[i]) out.nss += (s[i] - mean) / sd;
    out.nss /= static_cast<double>(n_fix);
  }

  out.auc_judd = detail::auc_judd(s, mask);
  return out;
}

// "auc_judd=... sim=... nss=... cc=... kl=..."
inline std::string to_record(const SaliencyScores& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "auc_judd=%.9g sim=%.9g nss=%.9g cc=%.9g kl=%.9g", m.auc_judd, m.sim, m.nss,
                m.cc, m.kl);
  return buf;
}

inline std::string to_csv_row(const SaliencyScores& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g", m.auc_judd, m.sim, m.nss, m.cc, m.kl);
  return buf;
}

}  // namespace aams
