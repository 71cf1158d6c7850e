// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "aams/error.hpp"
#include "aams/parallel.hpp"
#include "aams/tensor.hpp"

namespace aams {

enum class Padding { reflection_same, zero_same, valid };
enum class Activation { none, relu };

// Mirror index into [0, n) without repeating the edge sample.
inline int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

inline Tensor pad_tensor(const Tensor& in, int pad_h, int pad_w, Padding mode) {
  if (mode == Padding::valid || (pad_h == 0 && pad_w == 0)) return in;
  const int h = in.height(), w = in.width();
  Tensor out(in.channels(), h + 2 * pad_h, w + 2 * pad_w);
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      const int sy = y - pad_h;
      if (mode == Padding::zero_same && (sy < 0 || sy >= h)) continue;
      const int ry = reflect_index(sy, h);
      for (int x = 0; x < out.width(); ++x) {
        const int sx = x - pad_w;
        if (mode == Padding::zero_same && (sx < 0 || sx >= w)) continue;
        out(c, y, x) = in(c, ry, reflect_index(sx, w));
      }
    }
  }
  return out;
}

namespace detail {

constexpr int kConvChannelBlock = 8;

typedef float vec8 __attribute__((vector_size(32)));

inline vec8 load8(const float* p) noexcept {
  vec8 v;
  __builtin_memcpy(&v, p, sizeof(v));
  return v;
}

inline float activate(float v, Activation act) noexcept {
  return act == Activation::relu ? (v > 0.0f ? v : 0.0f) : v;
}

// Stride-1 valid correlation of `padded` for output channels [oc0, oc0 + B).
// Each output element sums over (in_ch, ky, kx) in that fixed order, so the
// result is independent of how blocks are scheduled across threads.
template <int B>
void conv_block_stride1(const Tensor& padded, const Filter& k, std::span<const float> bias,
                        Activation act, int oc0, Tensor& out) {
  constexpr int kLanes = 16;
  const int ho = out.height(), wo = out.width(), wp = padded.width();
  const std::size_t taps = k.per_output();
  std::vector<float> wt(taps * B);
  std::vector<std::size_t> offset(taps);
  {
    std::size_t t = 0;
    for (int ic = 0; ic < k.in_channels; ++ic)
      for (int ky = 0; ky < k.kernel_h; ++ky)
        for (int kx = 0; kx < k.kernel_w; ++kx, ++t) {
          offset[t] = ic * padded.plane() + static_cast<std::size_t>(ky) * wp + kx;
          for (int b = 0; b < B; ++b) wt[t * B + b] = k(oc0 + b, ic, ky, kx);
        }
  }
  float bv[B];
  for (int b = 0; b < B; ++b) bv[b] = bias.empty() ? 0.0f : bias[oc0 + b];
  const float* src_base = padded.data().data();
  for (int y = 0; y < ho; ++y) {
    const float* row = src_base + static_cast<std::size_t>(y) * wp;
    float* dst[B];
    for (int b = 0; b < B; ++b) dst[b] = out.channel(oc0 + b).data() + static_cast<std::size_t>(y) * wo;
    int x = 0;
    for (; x + kLanes <= wo; x += kLanes) {
      vec8 acc[B][2] = {};
      for (std::size_t t = 0; t < taps; ++t) {
        const float* s = row + offset[t] + x;
        const vec8 lo = load8(s), hi = load8(s + 8);
        const float* w = wt.data() + t * B;
        for (int b = 0; b < B; ++b) {
          acc[b][0] += w[b] * lo;
          acc[b][1] += w[b] * hi;
        }
      }
      for (int b = 0; b < B; ++b)
        for (int j = 0; j < 8; ++j) {
          dst[b][x + j] = activate(acc[b][0][j] + bv[b], act);
          dst[b][x + 8 + j] = activate(acc[b][1][j] + bv[b], act);
        }
    }
    for (; x < wo; ++x) {
      float acc[B] = {};
      for (std::size_t t = 0; t < taps; ++t) {
        const float s = row[offset[t] + x];
        for (int b = 0; b < B; ++b) acc[b] += wt[t * B + b] * s;
      }
      for (int b = 0; b < B; ++b) dst[b][x] = activate(acc[b] + bv[b], act);
    }
  }
}

inline void conv_strided(const Tensor& padded, const Filter& k, std::span<const float> bias,
                         int stride, Activation act, Tensor& out, int oc) {
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      float s = 0.0f;
      for (int ic = 0; ic < k.in_channels; ++ic)
        for (int ky = 0; ky < k.kernel_h; ++ky)
          for (int kx = 0; kx < k.kernel_w; ++kx)
            s += k(oc, ic, ky, kx) * padded(ic, y * stride + ky, x * stride + kx);
      out(oc, y, x) = activate(s + (bias.empty() ? 0.0f : bias[oc]), act);
    }
  }
}

}  // namespace detail

// Cross-correlation (no kernel flip) with optional bias and ReLU.
inline Tensor conv2d(const Tensor& input, const Filter& kernel, std::span<const float> bias,
                     int stride, Padding padding, Activation activation) {
  if (kernel.in_channels != input.channels())
    throw DimensionError(detail::concat("conv2d: kernel expects ", kernel.in_channels,
                                        " input channels, input has ", input.channels()));
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(kernel.out_channels))
    throw DimensionError(detail::concat("conv2d: bias length ", bias.size(), " != ",
                                        kernel.out_channels, " output channels"));
  if (stride < 1) throw ConfigurationError("conv2d: stride must be positive");
  int pad_h = 0, pad_w = 0;
  if (padding != Padding::valid) {
    if (kernel.kernel_h % 2 == 0 || kernel.kernel_w % 2 == 0)
      throw ConfigurationError(detail::concat("conv2d: same padding needs an odd kernel, got ",
                                              kernel.kernel_h, "x", kernel.kernel_w));
    pad_h = kernel.kernel_h / 2;
    pad_w = kernel.kernel_w / 2;
  }
  const Tensor padded = pad_tensor(input, pad_h, pad_w, padding);
  if (padded.height() < kernel.kernel_h || padded.width() < kernel.kernel_w)
    throw DimensionError(detail::concat("conv2d: input ", input.shape_string(), " smaller than kernel ",
                                        kernel.kernel_h, "x", kernel.kernel_w));
  const int ho = (padded.height() - kernel.kernel_h) / stride + 1;
  const int wo = (padded.width() - kernel.kernel_w) / stride + 1;
  Tensor out(kernel.out_channels, ho, wo);

  if (stride != 1) {
    parallel_for(static_cast<std::size_t>(kernel.out_channels), [&](std::size_t oc) {
      detail::conv_strided(padded, kernel, bias, stride, activation, out, static_cast<int>(oc));
    });
    return out;
  }
  constexpr int B = detail::kConvChannelBlock;
  const std::size_t blocks = (static_cast<std::size_t>(kernel.out_channels) + B - 1) / B;
  parallel_for(blocks, [&](std::size_t blk) {
    const int oc0 = static_cast<int>(blk) * B;
    int remaining = std::min(B, kernel.out_channels - oc0);
    int oc = oc0;
    if (remaining == B) {
      detail::conv_block_stride1<B>(padded, kernel, bias, activation, oc, out);
      return;
    }
    if (remaining >= 4) {
      detail::conv_block_stride1<4>(padded, kernel, bias, activation, oc, out);
      oc += 4;
      remaining -= 4;
    }
    for (; remaining > 0; --remaining, ++oc)
      detail::conv_block_stride1<1>(padded, kernel, bias, activation, oc, out);
  });
  return out;
}

// 2x2 window, stride 2.
inline Tensor avg_pool2d(const Tensor& input) {
  if (input.height() % 2 != 0 || input.width() % 2 != 0)
    throw DimensionError("avg_pool2d: spatial dims must be even, got " + input.shape_string());
  Tensor out(input.channels(), input.height() / 2, input.width() / 2);
  parallel_for(static_cast<std::size_t>(input.channels()), [&](std::size_t ci) {
    const int c = static_cast<int>(ci);
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x)
        out(c, y, x) = (input(c, 2 * y, 2 * x) + input(c, 2 * y, 2 * x + 1) +
                        input(c, 2 * y + 1, 2 * x) + input(c, 2 * y + 1, 2 * x + 1)) * 0.25f;
  });
  return out;
}

inline Tensor upsample_nearest(const Tensor& input, int factor = 2) {
  if (factor < 1) throw ConfigurationError("upsample_nearest: factor must be positive");
  Tensor out(input.channels(), input.height() * factor, input.width() * factor);
  for (int c = 0; c < input.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out(c, y, x) = input(c, y / factor, x / factor);
  return out;
}

// Bilinear resampling to an explicit size, half-pixel centers, edge clamped.
inline Tensor resize_bilinear_to(const Tensor& input, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1)
    throw ConfigurationError(detail::concat("resize: output dims must be >= 1, got ", out_h, "x", out_w));
  const int h = input.height(), w = input.width();
  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int out_n, int in_n) {
    std::vector<Tap> t(static_cast<std::size_t>(out_n));
    const double scale = static_cast<double>(in_n) / out_n;
    for (int o = 0; o < out_n; ++o) {
      double src = std::max(0.0, (o + 0.5) * scale - 0.5);
      int i0 = std::min(static_cast<int>(std::floor(src)), in_n - 1);
      int i1 = std::min(i0 + 1, in_n - 1);
      t[static_cast<std::size_t>(o)] = {i0, i1, i1 == i0 ? 0.0 : src - i0};
    }
    return t;
  };
  const auto ty = taps(out_h, h);
  const auto tx = taps(out_w, w);
  Tensor out(input.channels(), out_h, out_w);
  parallel_for(static_cast<std::size_t>(input.channels()), [&](std::size_t ci) {
    const int c = static_cast<int>(ci);
    for (int y = 0; y < out_h; ++y) {
      const Tap& a = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const Tap& b = tx[static_cast<std::size_t>(x)];
        const double v00 = input(c, a.i0, b.i0), v01 = input(c, a.i0, b.i1);
        const double v10 = input(c, a.i1, b.i0), v11 = input(c, a.i1, b.i1);
        const double top = v00 + (v01 - v00) * b.frac;
        const double bottom = v10 + (v11 - v10) * b.frac;
        out(c, y, x) = static_cast<float>(top + (bottom - top) * a.frac);
      }
    }
  });
  return out;
}

// Scales both spatial dims by `scale`; output dims are round(scale * dim).
inline Tensor resize_bilinear(const Tensor& input, double scale) {
  if (!(scale > 0.0)) throw ConfigurationError("resize: scale must be positive");
  const long oh = std::lround(scale * input.height());
  const long ow = std::lround(scale * input.width());
  if (oh < 1 || ow < 1)
    throw ConfigurationError(detail::concat("resize: scale ", scale, " maps ", input.shape_string(),
                                            " to an empty grid"));
  if (oh == input.height() && ow == input.width()) return input;
  return resize_bilinear_to(input, static_cast<int>(oh), static_cast<int>(ow));
}

// Normalized 1-D Gaussian taps for offsets -r..r, r = ceil(3 sigma).
inline std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

// Separable Gaussian smoothing with reflection padding, applied per channel.
inline Tensor gaussian_blur(const Tensor& map, double sigma) {
  if (sigma < 0.0) throw ConfigurationError("gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return map;
  const auto taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = map.height(), w = map.width();
  Tensor out(map.channels(), h, w);
  std::vector<double> rowpass(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < map.channels(); ++c) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -radius; k <= radius; ++k)
          s += taps[static_cast<std::size_t>(k + radius)] * map(c, y, reflect_index(x + k, w));
        rowpass[static_cast<std::size_t>(y) * w + x] = s;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -radius; k <= radius; ++k)
          s += taps[static_cast<std::size_t>(k + radius)] *
               rowpass[static_cast<std::size_t>(reflect_index(y + k, h)) * w + x];
        out(c, y, x) = static_cast<float>(s);
      }
  }
  return out;
}

// Row-wise softmax with max subtraction.
template <typename T>
BasicMatrix<T> softmax_rows(const BasicMatrix<T>& m) {
  BasicMatrix<T> out(m.rows(), m.cols());
  parallel_for(m.rows(), [&](std::size_t r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    if (src.empty()) return;
    const T peak = *std::max_element(src.begin(), src.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      double e = std::exp(static_cast<double>(src[j]) - static_cast<double>(peak));
      dst[j] = static_cast<T>(e);
      sum += e;
    }
    for (auto& v : dst) v = static_cast<T>(static_cast<double>(v) / sum);
  });
  return out;
}

}  // namespace aams
