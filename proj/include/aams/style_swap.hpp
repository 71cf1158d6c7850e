// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aams/error.hpp"
#include "aams/kernels.hpp"
#include "aams/parallel.hpp"
#include "aams/tensor.hpp"

namespace aams {

inline constexpr int kDefaultPatchSize = 3;

// Stride-1 p x p patches of a feature map. Patch i sits at
// (i / cols, i % cols) with cols = W - p + 1.
struct PatchBank {
  int patch = 0;
  Filter raw;         // count x C x p x p
  Filter normalized;  // each patch scaled to unit Frobenius norm
  std::vector<float> norms;
  std::vector<std::uint8_t> zero_norm;

  std::size_t count() const noexcept { return norms.size(); }
};

inline PatchBank extract_patches(const Tensor& f, int p) {
  if (p < 1 || p % 2 == 0) throw ConfigurationError(detail::concat("patch size must be odd and positive, got ", p));
  if (f.height() < p || f.width() < p)
    throw ValidationError(detail::concat("feature ", f.shape_string(), " is smaller than the ", p, "x", p, " patch"));
  const int rows = f.height() - p + 1, cols = f.width() - p + 1;
  const int count = rows * cols;
  PatchBank bank;
  bank.patch = p;
  bank.raw = Filter(count, f.channels(), p, p);
  bank.normalized = Filter(count, f.channels(), p, p);
  bank.norms.resize(static_cast<std::size_t>(count));
  bank.zero_norm.resize(static_cast<std::size_t>(count));
  const std::size_t per = bank.raw.per_output();
  for (int i = 0; i < count; ++i) {
    const int py = i / cols, px = i % cols;
    float* dst = bank.raw.data.data() + static_cast<std::size_t>(i) * per;
    double ss = 0.0;
    for (int c = 0; c < f.channels(); ++c)
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) {
          const float v = f(c, py + y, px + x);
          *dst++ = v;
          ss += static_cast<double>(v) * v;
        }
    const double norm = std::sqrt(ss);
    bank.norms[static_cast<std::size_t>(i)] = static_cast<float>(norm);
    bank.zero_norm[static_cast<std::size_t>(i)] = norm < 1e-12 ? 1 : 0;
    const float* src = bank.raw.data.data() + static_cast<std::size_t>(i) * per;
    float* ndst = bank.normalized.data.data() + static_cast<std::size_t>(i) * per;
    for (std::size_t k = 0; k < per; ++k)
      ndst[k] = bank.zero_norm[static_cast<std::size_t>(i)] ? 0.0f : static_cast<float>(src[k] / norm);
  }
  return bank;
}

struct SwapResult {
  Tensor feature;
  std::vector<int> selection;  // style patch index per content location, row-major
  int rows = 0;
  int cols = 0;
};

// Replaces every content patch by the style patch with the highest
// correlation against the unit-normalized style patches (lowest index wins
// ties), then averages overlapping placements.
inline SwapResult style_swap_detailed(const Tensor& content, const Tensor& style, int p = kDefaultPatchSize) {
  if (content.channels() != style.channels())
    throw DimensionError(detail::concat("style_swap: content has ", content.channels(), " channels, style ",
                                        style.channels()));
  if (content.height() < p || content.width() < p)
    throw ValidationError(detail::concat("style_swap: content ", content.shape_string(), " smaller than patch ", p));
  const PatchBank bank = extract_patches(style, p);
  if (std::all_of(bank.zero_norm.begin(), bank.zero_norm.end(), [](std::uint8_t z) { return z != 0; }))
    throw ValidationError("style_swap: every style patch has zero norm");

  // Correlation scores are (content patches) x (normalized style patches)^T,
  // evaluated in fixed row chunks so memory stays bounded and the summation
  // order never depends on the worker count.
  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int channels = content.channels(), h = content.height(), w = content.width();
  SwapResult result;
  result.rows = h - p + 1;
  result.cols = w - p + 1;
  const std::size_t locations = static_cast<std::size_t>(result.rows) * result.cols;
  const std::size_t per = bank.raw.per_output();
  const Eigen::Map<const RowMajor> style_rows(bank.normalized.data.data(), static_cast<Eigen::Index>(bank.count()),
                                              static_cast<Eigen::Index>(per));
  result.selection.assign(locations, -1);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (locations + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t begin = chunk * kChunk, end = std::min(locations, begin + kChunk);
    RowMajor patches(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(per));
    for (std::size_t l = begin; l < end; ++l) {
      const int ly = static_cast<int>(l) / result.cols, lx = static_cast<int>(l) % result.cols;
      float* dst = patches.row(static_cast<Eigen::Index>(l - begin)).data();
      for (int c = 0; c < channels; ++c)
        for (int y = 0; y < p; ++y)
          for (int x = 0; x < p; ++x) *dst++ = content(c, ly + y, lx + x);
    }
    const RowMajor scores = patches * style_rows.transpose();
    for (std::size_t l = begin; l < end; ++l) {
      const float* row = scores.row(static_cast<Eigen::Index>(l - begin)).data();
      int arg = -1;
      float best = 0.0f;
      for (std::size_t s = 0; s < bank.count(); ++s)
        if (!bank.zero_norm[s] && (arg < 0 || row[s] > best)) {
          best = row[s];
          arg = static_cast<int>(s);
        }
      result.selection[l] = arg;
    }
  });

  // Overlap average in double: n copies of the same float sum exactly.
  std::vector<double> sum(static_cast<std::size_t>(channels) * h * w, 0.0);
  std::vector<int> hits(static_cast<std::size_t>(h) * w, 0);
  for (int ly = 0; ly < result.rows; ++ly)
    for (int lx = 0; lx < result.cols; ++lx) {
      const int s = result.selection[static_cast<std::size_t>(ly) * result.cols + lx];
      const float* src = bank.raw.data.data() + static_cast<std::size_t>(s) * per;
      for (int c = 0; c < channels; ++c)
        for (int y = 0; y < p; ++y)
          for (int x = 0; x < p; ++x)
            sum[(static_cast<std::size_t>(c) * h + ly + y) * w + lx + x] += *src++;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) ++hits[static_cast<std::size_t>(ly + y) * w + lx + x];
    }
  result.feature = Tensor(channels, h, w);
  auto out = result.feature.data();
  for (int c = 0; c < channels; ++c)
    for (std::size_t i = 0, n = static_cast<std::size_t>(h) * w; i < n; ++i)
      out[c * n + i] = static_cast<float>(sum[c * n + i] / hits[i]);
  return result;
}

inline Tensor style_swap(const Tensor& content, const Tensor& style, int p = kDefaultPatchSize) {
  return style_swap_detailed(content, style, p).feature;
}

// One swap per scale coefficient against the bilinearly rescaled style.
inline std::vector<Tensor> multi_scale_swap(const Tensor& content, const Tensor& style,
                                            std::span<const double> betas, int p = kDefaultPatchSize) {
  std::vector<Tensor> scaled;
  scaled.reserve(betas.size());
  for (double beta : betas) {
    if (!(beta > 0.0)) throw ConfigurationError(detail::concat("scale coefficient ", beta, " must be positive"));
    const long h = std::lround(beta * style.height()), w = std::lround(beta * style.width());
    if (h < p || w < p)
      throw ConfigurationError(detail::concat("scale coefficient ", beta, " shrinks the style feature ",
                                              style.shape_string(), " below the ", p, "x", p, " patch"));
    scaled.push_back(resize_bilinear(style, beta));
  }
  std::vector<Tensor> out;
  out.reserve(betas.size());
  for (const Tensor& s : scaled) out.push_back(style_swap(content, s, p));
  return out;
}

// K + 1 features for fusion: the whitened content first (finest stroke), then
// the swapped features ordered by ascending scale coefficient.
struct StrokeSet {
  std::vector<Tensor> strokes;
  std::vector<double> betas;  // betas[k] belongs to strokes[k + 1]

  std::size_t size() const noexcept { return strokes.size(); }
};

inline StrokeSet build_stroke_set(const Tensor& content_white, std::vector<Tensor> swapped,
                                  std::span<const double> betas) {
  if (swapped.size() != betas.size())
    throw DimensionError(detail::concat("build_stroke_set: ", swapped.size(), " swapped features for ",
                                        betas.size(), " scale coefficients"));
  for (const Tensor& s : swapped) require_same_shape(content_white, s, "build_stroke_set");
  std::vector<std::size_t> order(betas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return betas[a] < betas[b]; });
  StrokeSet set;
  set.strokes.reserve(swapped.size() + 1);
  set.strokes.push_back(content_white);
  for (std::size_t i : order) {
    set.strokes.push_back(std::move(swapped[i]));
    set.betas.push_back(betas[i]);
  }
  return set;
}

}  // namespace aams
