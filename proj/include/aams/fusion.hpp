// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "aams/attention.hpp"
#include "aams/error.hpp"
#include "aams/kernels.hpp"
#include "aams/style_swap.hpp"
#include "aams/tensor.hpp"

namespace aams {

inline constexpr double kDefaultAttentionSigma = 1.0;
inline constexpr double kDefaultGamma = 50.0;

// Single-channel grid in [0,1].
struct AttentionMap {
  Tensor map;

  int height() const { return map.height(); }
  int width() const { return map.width(); }
  std::span<const float> values() const { return map.data(); }
};

// |A| -> mean over channels -> Gaussian blur -> min-max to [0,1].
// A constant map (before normalization) becomes all zeros.
inline AttentionMap attention_filter(const AttentionFeature& attention, double sigma = kDefaultAttentionSigma) {
  const Tensor& a = attention.a;
  Tensor reduced(1, a.height(), a.width());
  auto dst = reduced.data();
  std::vector<double> acc(a.plane(), 0.0);
  for (int c = 0; c < a.channels(); ++c) {
    auto src = a.channel(c);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(src[i]);
  }
  for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i] / a.channels());

  Tensor smooth = gaussian_blur(reduced, sigma);
  auto v = smooth.data();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const float lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(v.begin(), v.end(), 0.0f);
  } else {
    const float range = hi - lo;
    for (float& x : v) x = (x - lo) / range;
  }
  return {std::move(smooth)};
}

enum class KMeansInit {
  optimal_partition,  // exact 1-D optimum, then Lloyd refinement
  quantiles,          // evenly spaced quantiles, then Lloyd
};

struct KMeansOptions {
  int max_iters = 100;
  double tol = 1e-6;
  KMeansInit init = KMeansInit::optimal_partition;
};

struct ClusterResult {
  std::vector<double> centers;            // descending
  std::vector<double> objective_history;  // sum of squared distances after each Lloyd update
  double objective = 0.0;
  int iterations = 0;
};

namespace detail {

// Distinct sorted values with their multiplicities.
struct WeightedValues {
  std::vector<double> x;
  std::vector<double> w;
};

inline WeightedValues distinct_values(std::span<const float> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  WeightedValues out;
  for (double v : sorted) {
    if (!out.x.empty() && out.x.back() == v) {
      out.w.back() += 1.0;
    } else {
      out.x.push_back(v);
      out.w.push_back(1.0);
    }
  }
  return out;
}

// Optimal contiguous partition of sorted weighted values into k groups.
// Returns the group means ascending. Divide-and-conquer over the split index,
// which is monotone in the segment end for 1-D squared-error clustering.
inline std::vector<double> optimal_partition_means(const WeightedValues& v, int k) {
  const std::size_t n = v.x.size();
  std::vector<double> sw(n + 1, 0.0), sx(n + 1, 0.0), sxx(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sw[i + 1] = sw[i] + v.w[i];
    sx[i + 1] = sx[i] + v.w[i] * v.x[i];
    sxx[i + 1] = sxx[i] + v.w[i] * v.x[i] * v.x[i];
  }
  auto cost = [&](std::size_t i, std::size_t j) {  // segment [i, j)
    const double w = sw[j] - sw[i], s = sx[j] - sx[i];
    return std::max(0.0, (sxx[j] - sxx[i]) - s * s / w);
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(static_cast<std::size_t>(k) + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> split(static_cast<std::size_t>(k) + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) best[1][j] = cost(0, j);
  for (std::size_t c = 2; c <= static_cast<std::size_t>(k); ++c) {
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      double best_cost = inf;
      std::size_t best_i = opt_lo;
      for (std::size_t i = std::max(opt_lo, c - 1); i <= std::min(mid - 1, opt_hi); ++i) {
        const double total = best[c - 1][i] + cost(i, mid);
        if (total < best_cost) {
          best_cost = total;
          best_i = i;
        }
      }
      best[c][mid] = best_cost;
      split[c][mid] = best_i;
      if (mid > lo) self(self, lo, mid - 1, opt_lo, best_i);
      self(self, mid + 1, hi, best_i, opt_hi);
    };
    solve(solve, c, n, c - 1, n - 1);
  }
  std::vector<double> means(static_cast<std::size_t>(k));
  std::size_t end = n;
  for (std::size_t c = static_cast<std::size_t>(k); c >= 1; --c) {
    const std::size_t begin = c == 1 ? 0 : split[c][end];
    means[c - 1] = (sx[end] - sx[begin]) / (sw[end] - sw[begin]);
    end = begin;
  }
  return means;
}

inline std::vector<double> quantile_seeds(const WeightedValues& v, int k) {
  const double total = std::accumulate(v.w.begin(), v.w.end(), 0.0);
  std::vector<double> seeds;
  std::size_t i = 0;
  double seen = 0.0;
  for (int c = 0; c < k; ++c) {
    const double rank = std::floor((c + 0.5) * total / k);
    while (i + 1 < v.x.size() && seen + v.w[i] <= rank) seen += v.w[i++];
    seeds.push_back(v.x[i]);
  }
  return seeds;
}

inline std::size_t nearest_center(double x, const std::vector<double>& centers) {
  std::size_t best = 0;
  double best_d = std::abs(x - centers[0]);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = std::abs(x - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Moves the center of cluster `target` to the value farthest from its nearest center.
inline void reseat_center(const WeightedValues& v, std::vector<double>& centers, std::size_t target) {
  double far_d = -1.0;
  double far_x = centers[target];
  for (double x : v.x) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (c != target) d = std::min(d, std::abs(x - centers[c]));
    if (d > far_d) {
      far_d = d;
      far_x = x;
    }
  }
  centers[target] = far_x;
}

}  // namespace detail

// Lloyd iterations on scalar values. Requires clusters <= distinct values.
inline ClusterResult kmeans_1d(std::span<const float> values, int clusters, const KMeansOptions& options = {}) {
  if (clusters < 1) throw ValidationError("kmeans_1d: need at least one cluster");
  const detail::WeightedValues v = detail::distinct_values(values);
  if (static_cast<std::size_t>(clusters) > v.x.size())
    throw ValidationError(detail::concat("kmeans_1d: ", clusters, " clusters requested but only ", v.x.size(),
                                         " distinct values"));
  const std::size_t k = static_cast<std::size_t>(clusters);
  std::vector<double> centers = options.init == KMeansInit::optimal_partition
                                    ? detail::optimal_partition_means(v, clusters)
                                    : detail::quantile_seeds(v, clusters);
  for (std::size_t c = 1; c < k; ++c)
    for (std::size_t d = 0; d < c; ++d)
      if (centers[c] == centers[d]) detail::reseat_center(v, centers, c);

  ClusterResult result;
  std::vector<double> sum(k), weight(k);
  std::vector<std::size_t> assignment(v.x.size());
  for (int iter = 0; iter < options.max_iters; ++iter) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t i = 0; i < v.x.size(); ++i) {
      assignment[i] = detail::nearest_center(v.x[i], centers);
      sum[assignment[i]] += v.w[i] * v.x[i];
      weight[assignment[i]] += v.w[i];
    }
    std::vector<double> updated = centers;
    for (std::size_t c = 0; c < k; ++c)
      if (weight[c] > 0.0) updated[c] = sum[c] / weight[c];
    double objective = 0.0;
    for (std::size_t i = 0; i < v.x.size(); ++i) {
      const double d = v.x[i] - updated[assignment[i]];
      objective += v.w[i] * d * d;
    }
    result.objective_history.push_back(objective);
    for (std::size_t c = 0; c < k; ++c)
      if (weight[c] == 0.0) detail::reseat_center(v, updated, c);
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) movement = std::max(movement, std::abs(updated[c] - centers[c]));
    centers = std::move(updated);
    result.iterations = iter + 1;
    if (movement < options.tol) break;
  }
  result.objective = result.objective_history.empty() ? 0.0 : result.objective_history.back();
  std::sort(centers.begin(), centers.end(), std::greater<>());
  result.centers = std::move(centers);
  return result;
}

inline ClusterResult kmeans_1d(const AttentionMap& map, int clusters, const KMeansOptions& options = {}) {
  return kmeans_1d(map.values(), clusters, options);
}

// One map per stroke; maps[k] pairs with centers[k] (descending), so the
// highest-attention center drives stroke 0, the finest.
struct WeightMaps {
  std::vector<Tensor> maps;

  std::size_t size() const noexcept { return maps.size(); }
};

// Softmax over gamma * (1 - |A - m_k|) at every pixel.
inline WeightMaps stroke_weight_maps(const AttentionMap& map, const ClusterResult& clusters, double gamma) {
  if (clusters.centers.empty()) throw ValidationError("stroke_weight_maps: no cluster centers");
  if (gamma < 0.0) throw ConfigurationError("stroke_weight_maps: gamma must be non-negative");
  const std::size_t k = clusters.centers.size();
  WeightMaps out;
  out.maps.assign(k, Tensor(1, map.height(), map.width()));
  const auto values = map.values();
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      logits[c] = gamma * (1.0 - std::abs(static_cast<double>(values[i]) - clusters.centers[c]));
      peak = std::max(peak, logits[c]);
    }
    double total = 0.0;
    for (double& l : logits) total += (l = std::exp(l - peak));
    for (std::size_t c = 0; c < k; ++c) out.maps[c].data()[i] = static_cast<float>(logits[c] / total);
  }
  return out;
}

// Per-pixel convex combination of the strokes, weight broadcast over channels.
inline Tensor fuse(const StrokeSet& strokes, const WeightMaps& weights) {
  if (strokes.size() == 0) throw DimensionError("fuse: empty stroke set");
  if (weights.size() != strokes.size())
    throw DimensionError(detail::concat("fuse: ", weights.size(), " weight maps for ", strokes.size(), " strokes"));
  const Tensor& first = strokes.strokes.front();
  for (std::size_t k = 0; k < strokes.size(); ++k) {
    require_same_shape(first, strokes.strokes[k], "fuse");
    const Tensor& w = weights.maps[k];
    if (w.channels() != 1 || w.height() != first.height() || w.width() != first.width())
      throw DimensionError(detail::concat("fuse: weight map ", w.shape_string(), " does not cover stroke ",
                                          first.shape_string()));
  }
  Tensor out(first.channels(), first.height(), first.width());
  const std::size_t plane = first.plane();
  parallel_for(static_cast<std::size_t>(first.channels()), [&](std::size_t c) {
    auto dst = out.channel(static_cast<int>(c));
    for (std::size_t k = 0; k < strokes.size(); ++k) {
      auto src = strokes.strokes[k].channel(static_cast<int>(c));
      auto w = weights.maps[k].data();
      for (std::size_t i = 0; i < plane; ++i) dst[i] += w[i] * src[i];
    }
  });
  return out;
}

}  // namespace aams
