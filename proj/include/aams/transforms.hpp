// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "aams/error.hpp"
#include "aams/linalg.hpp"
#include "aams/parallel.hpp"
#include "aams/tensor.hpp"

namespace aams {

inline constexpr double kWhiteningEpsilon = 1e-8;
inline constexpr float kAdainEpsilon = 1e-5f;

// First and second moments of a flattened C x N feature, plus its spectrum.
struct FeatureStats {
  std::vector<double> mean;
  MatrixD covariance;  // centered, divided by N - 1
  EigenDecomposition eig;
  std::size_t rank = 0;  // eigenvalues above the whitening epsilon
  double epsilon = kWhiteningEpsilon;

  int channels() const { return static_cast<int>(mean.size()); }
};

namespace detail {

inline MatrixD centered_features(const Tensor& f, std::vector<double>& mean) {
  const std::size_t c = static_cast<std::size_t>(f.channels()), n = f.plane();
  MatrixD x(c, n);
  mean.assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    auto src = f.channel(static_cast<int>(ch));
    double s = 0.0;
    for (float v : src) s += v;
    mean[ch] = s / static_cast<double>(n);
    auto dst = x.row(ch);
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] - mean[ch];
  }
  return x;
}

// E_r diag(g(lambda)) E_r^T over the retained eigenpairs.
template <typename Fn>
MatrixD spectral_map(const FeatureStats& stats, Fn&& g) {
  const std::size_t c = stats.mean.size(), r = stats.rank;
  MatrixD scaled(c, r), basis_t(r, c);
  for (std::size_t k = 0; k < r; ++k) {
    const double w = g(stats.eig.values[k]);
    for (std::size_t i = 0; i < c; ++i) {
      scaled(i, k) = stats.eig.vectors(i, k) * w;
      basis_t(k, i) = stats.eig.vectors(i, k);
    }
  }
  return matmul(scaled, basis_t);
}

inline Tensor to_tensor(const MatrixD& m, int height, int width) {
  Tensor t(static_cast<int>(m.rows()), height, width);
  auto dst = t.data();
  auto src = m.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
  return t;
}

}  // namespace detail

inline FeatureStats feature_stats(const Tensor& f, double epsilon = kWhiteningEpsilon) {
  if (f.plane() < 2)
    throw ValidationError("feature statistics need at least 2 locations, got " + f.shape_string());
  FeatureStats stats;
  stats.epsilon = epsilon;
  const MatrixD x = detail::centered_features(f, stats.mean);
  stats.covariance = gram(x, static_cast<double>(f.plane() - 1));
  stats.eig = sym_eig(stats.covariance);
  stats.rank = 0;
  while (stats.rank < stats.eig.values.size() && stats.eig.values[stats.rank] > epsilon) ++stats.rank;
  return stats;
}

struct Whitened {
  Tensor white;
  FeatureStats stats;
};

// Centers each channel and removes the covariance structure. Components with
// eigenvalue <= epsilon are dropped.
inline Whitened whiten(const Tensor& f, double epsilon = kWhiteningEpsilon) {
  Whitened out;
  out.stats = feature_stats(f, epsilon);
  std::vector<double> mean;
  const MatrixD x = detail::centered_features(f, mean);
  const MatrixD t = detail::spectral_map(out.stats, [](double l) { return 1.0 / std::sqrt(l); });
  out.white = detail::to_tensor(matmul(t, x), f.height(), f.width());
  return out;
}

// Imposes the style covariance and mean on a whitened feature.
inline Tensor color(const Tensor& white, const FeatureStats& style) {
  if (white.channels() != style.channels())
    throw DimensionError(detail::concat("color: feature has ", white.channels(), " channels, style stats ",
                                        style.channels()));
  const MatrixD t = detail::spectral_map(style, [](double l) { return std::sqrt(l); });
  const std::size_t c = static_cast<std::size_t>(white.channels()), n = white.plane();
  MatrixD x(c, n);
  for (std::size_t ch = 0; ch < c; ++ch) {
    auto src = white.channel(static_cast<int>(ch));
    auto dst = x.row(ch);
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i];
  }
  MatrixD y = matmul(t, x);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (double& v : y.row(ch)) v += style.mean[ch];
  return detail::to_tensor(y, white.height(), white.width());
}

struct ChannelMoments {
  std::vector<double> mean;
  std::vector<double> stddev;  // population
};

inline ChannelMoments channel_moments(const Tensor& f) {
  ChannelMoments m;
  m.mean.resize(static_cast<std::size_t>(f.channels()));
  m.stddev.resize(m.mean.size());
  for (int c = 0; c < f.channels(); ++c) {
    auto v = f.channel(c);
    double s = 0.0;
    for (float x : v) s += x;
    const double mu = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (float x : v) ss += (x - mu) * (x - mu);
    m.mean[static_cast<std::size_t>(c)] = mu;
    m.stddev[static_cast<std::size_t>(c)] = std::sqrt(ss / static_cast<double>(v.size()));
  }
  return m;
}

// Per-channel renormalization of `content` to the mean/std of `style`.
inline Tensor adain(const Tensor& content, const Tensor& style, float epsilon = kAdainEpsilon) {
  if (content.channels() != style.channels())
    throw DimensionError(detail::concat("adain: content has ", content.channels(), " channels, style ",
                                        style.channels()));
  const ChannelMoments mc = channel_moments(content);
  const ChannelMoments ms = channel_moments(style);
  Tensor out(content.channels(), content.height(), content.width());
  parallel_for(static_cast<std::size_t>(content.channels()), [&](std::size_t c) {
    const double scale = ms.stddev[c] / (mc.stddev[c] + epsilon);
    auto src = content.channel(static_cast<int>(c));
    auto dst = out.channel(static_cast<int>(c));
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = static_cast<float>(scale * (src[i] - mc.mean[c]) + ms.mean[c]);
  });
  return out;
}

}  // namespace aams
