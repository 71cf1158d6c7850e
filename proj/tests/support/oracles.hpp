// SPDX-License-Identifier: Apache-2.0
// Straightforward reference implementations used as test oracles. These are
// deliberately written without sharing code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "aams/aams.hpp"

namespace oracle {

using aams::Filter;
using aams::Tensor;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Tensor tensor(int c, int h, int w, double lo = -1.0, double hi = 1.0) {
    Tensor t(c, h, w);
    for (float& v : t.data()) v = static_cast<float>(uniform(lo, hi));
    return t;
  }
  Tensor gaussian_tensor(int c, int h, int w, double sd = 1.0) {
    Tensor t(c, h, w);
    for (float& v : t.data()) v = static_cast<float>(normal(0.0, sd));
    return t;
  }
  Filter filter(int out, int in, int kh, int kw, double lo = -1.0, double hi = 1.0) {
    Filter f(out, in, kh, kw);
    for (float& v : f.data) v = static_cast<float>(uniform(lo, hi));
    return f;
  }
  std::vector<float> floats(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(uniform(lo, hi));
    return v;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i])));
  return m;
}

// Mirror an out-of-range index back into [0, n) without repeating the edge.
inline int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

enum class Pad { reflect, zero, none };

// Six nested loops over (o, y, x, i, ky, kx), accumulated in long double.
inline Tensor conv2d(const Tensor& in, const Filter& k, const std::vector<float>& bias, int stride, Pad pad,
                     bool relu) {
  const int ph = pad == Pad::none ? 0 : k.kernel_h / 2;
  const int pw = pad == Pad::none ? 0 : k.kernel_w / 2;
  const int ho = (in.height() + 2 * ph - k.kernel_h) / stride + 1;
  const int wo = (in.width() + 2 * pw - k.kernel_w) / stride + 1;
  Tensor out(k.out_channels, ho, wo);
  for (int o = 0; o < k.out_channels; ++o)
    for (int y = 0; y < ho; ++y)
      for (int x = 0; x < wo; ++x) {
        long double s = bias.empty() ? 0.0L : bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < k.in_channels; ++i)
          for (int ky = 0; ky < k.kernel_h; ++ky)
            for (int kx = 0; kx < k.kernel_w; ++kx) {
              int sy = y * stride + ky - ph, sx = x * stride + kx - pw;
              float v;
              if (sy >= 0 && sy < in.height() && sx >= 0 && sx < in.width()) {
                v = in(i, sy, sx);
              } else if (pad == Pad::zero) {
                v = 0.0f;
              } else {
                v = in(i, mirror(sy, in.height()), mirror(sx, in.width()));
              }
              s += static_cast<long double>(v) * k(o, i, ky, kx);
            }
        if (relu && s < 0) s = 0;
        out(o, y, x) = static_cast<float>(s);
      }
  return out;
}

inline Tensor avg_pool(const Tensor& in) {
  Tensor out(in.channels(), in.height() / 2, in.width() / 2);
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x)
        out(c, y, x) = (in(c, 2 * y, 2 * x) + in(c, 2 * y, 2 * x + 1) + in(c, 2 * y + 1, 2 * x) +
                        in(c, 2 * y + 1, 2 * x + 1)) /
                       4.0f;
  return out;
}

inline Tensor upsample(const Tensor& in) {
  Tensor out(in.channels(), in.height() * 2, in.width() * 2);
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out(c, y, x) = in(c, y / 2, x / 2);
  return out;
}

// Half-pixel centers: source coordinate (d + 0.5) * in / out - 0.5, clamped to the grid.
inline Tensor bilinear(const Tensor& in, int oh, int ow) {
  Tensor out(in.channels(), oh, ow);
  auto coord = [](int d, int n_in, int n_out, int& i0, int& i1, double& t) {
    double s = (d + 0.5) * n_in / n_out - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n_in - 1);
    t = s - i0;
  };
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        int y0, y1, x0, x1;
        double ty, tx;
        coord(y, in.height(), oh, y0, y1, ty);
        coord(x, in.width(), ow, x0, x1, tx);
        const double top = in(c, y0, x0) * (1 - tx) + in(c, y0, x1) * tx;
        const double bot = in(c, y1, x0) * (1 - tx) + in(c, y1, x1) * tx;
        out(c, y, x) = static_cast<float>(top * (1 - ty) + bot * ty);
      }
  return out;
}

// Normalized 2-D Gaussian on a (2r+1)^2 grid, r = ceil(3 sigma).
inline std::vector<std::vector<double>> gaussian_kernel_2d(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<std::vector<double>> k(2 * r + 1, std::vector<double>(2 * r + 1));
  double total = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) total += k[y + r][x + r] = std::exp(-(x * x + y * y) / (2 * sigma * sigma));
  for (auto& row : k)
    for (double& v : row) v /= total;
  return k;
}

// Direct 2-D Gaussian convolution with mirrored borders.
inline Tensor blur(const Tensor& in, double sigma) {
  if (sigma == 0.0) return in;
  const auto k = gaussian_kernel_2d(sigma);
  const int r = static_cast<int>(k.size() / 2);
  Tensor out(in.channels(), in.height(), in.width());
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x) {
        long double s = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            s += k[dy + r][dx + r] * in(c, mirror(y + dy, in.height()), mirror(x + dx, in.width()));
        out(c, y, x) = static_cast<float>(s);
      }
  return out;
}

inline std::vector<long double> softmax(const std::vector<long double>& row) {
  long double peak = *std::max_element(row.begin(), row.end());
  std::vector<long double> out(row.size());
  long double total = 0;
  for (std::size_t i = 0; i < row.size(); ++i) total += out[i] = std::exp(row[i] - peak);
  for (long double& v : out) v /= total;
  return out;
}

// Energy, softmax weights and attention feature as plain loops over locations and channels.
struct AttentionOracle {
  std::vector<std::vector<long double>> energy;  // N x N
  std::vector<std::vector<long double>> alpha;   // N x N
  Tensor a;                                      // C x H x W
};

inline AttentionOracle attention(const Tensor& f, const Filter& th, const Filter& tu, const Filter& tg) {
  const int c = f.channels(), h = f.height(), w = f.width(), n = h * w;
  auto project = [&](const Filter& t, int loc, int o) {
    long double s = 0;
    for (int i = 0; i < c; ++i) s += static_cast<long double>(t(o, i, 0, 0)) * f(i, loc / w, loc % w);
    return s;
  };
  AttentionOracle out;
  out.energy.assign(n, std::vector<long double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long double s = 0;
      for (int o = 0; o < tu.out_channels; ++o) s += project(tu, i, o) * project(tg, j, o);
      out.energy[i][j] = s;
    }
  out.alpha.resize(n);
  for (int i = 0; i < n; ++i) out.alpha[i] = softmax(out.energy[i]);
  out.a = Tensor(c, h, w);
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < c; ++o) {
      long double s = 0;
      for (int j = 0; j < n; ++j) s += out.alpha[i][j] * project(th, j, o);
      out.a(o, i / w, i % w) = static_cast<float>(s);
    }
  return out;
}

// Exhaustive patch matching: for every content patch, the style patch with the
// largest <content, style / |style|>, lowest index on ties; then overlap average.
struct SwapOracle {
  std::vector<int> selection;
  Tensor feature;
};

inline SwapOracle style_swap(const Tensor& content, const Tensor& style, int p) {
  const int c = content.channels();
  const int srows = style.height() - p + 1, scols = style.width() - p + 1;
  const int crows = content.height() - p + 1, ccols = content.width() - p + 1;
  std::vector<long double> norms(static_cast<std::size_t>(srows) * scols);
  for (int s = 0; s < srows * scols; ++s) {
    long double ss = 0;
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) {
          const long double v = style(ch, s / scols + y, s % scols + x);
          ss += v * v;
        }
    norms[static_cast<std::size_t>(s)] = std::sqrt(ss);
  }
  SwapOracle out;
  std::vector<long double> sum(content.size(), 0);
  std::vector<int> hits(content.plane(), 0);
  for (int l = 0; l < crows * ccols; ++l) {
    const int ly = l / ccols, lx = l % ccols;
    long double best = -std::numeric_limits<long double>::infinity();
    int arg = -1;
    for (int s = 0; s < srows * scols; ++s) {
      if (norms[static_cast<std::size_t>(s)] < 1e-12L) continue;
      long double dot = 0;
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < p; ++y)
          for (int x = 0; x < p; ++x)
            dot += static_cast<long double>(content(ch, ly + y, lx + x)) * style(ch, s / scols + y, s % scols + x);
      dot /= norms[static_cast<std::size_t>(s)];
      if (dot > best) {
        best = dot;
        arg = s;
      }
    }
    out.selection.push_back(arg);
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x)
          sum[(static_cast<std::size_t>(ch) * content.height() + ly + y) * content.width() + lx + x] +=
              style(ch, arg / scols + y, arg % scols + x);
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x) ++hits[static_cast<std::size_t>(ly + y) * content.width() + lx + x];
  }
  out.feature = Tensor(c, content.height(), content.width());
  for (std::size_t i = 0; i < content.size(); ++i) out.feature.data()[i] = static_cast<float>(sum[i] / hits[i % content.plane()]);
  return out;
}

// Minimum within-cluster sum of squares for k contiguous groups of the sorted
// values, O(k n^2) dynamic program.
inline double optimal_kmeans_objective(std::vector<double> x, int k) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  std::vector<long double> s1(n + 1, 0), s2(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + x[i];
    s2[i + 1] = s2[i] + static_cast<long double>(x[i]) * x[i];
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // [a, b)
    const long double m = static_cast<long double>(b - a);
    const long double s = s1[b] - s1[a];
    return std::max<long double>(0, s2[b] - s2[a] - s * s / m);
  };
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<std::vector<long double>> dp(static_cast<std::size_t>(k) + 1, std::vector<long double>(n + 1, inf));
  dp[0][0] = 0;
  for (int c = 1; c <= k; ++c)
    for (std::size_t b = 1; b <= n; ++b)
      for (std::size_t a = static_cast<std::size_t>(c) - 1; a < b; ++a)
        if (dp[c - 1][a] < inf) dp[c][b] = std::min(dp[c][b], dp[c - 1][a] + cost(a, b));
  return static_cast<double>(dp[k][n]);
}

// Stroke weights at one pixel, evaluated literally (no stabilization) in long double.
inline std::vector<long double> stroke_weights(double value, const std::vector<double>& centers, double gamma) {
  std::vector<long double> e(centers.size());
  long double total = 0;
  for (std::size_t k = 0; k < centers.size(); ++k)
    total += e[k] = std::exp(static_cast<long double>(gamma) * (1.0L - std::fabs(static_cast<long double>(value) - centers[k])));
  for (long double& v : e) v /= total;
  return e;
}

// Textbook saliency metrics on flat arrays.
struct Saliency {
  double auc_judd, sim, nss, cc, kl;
};

inline Saliency saliency(const std::vector<double>& content, const std::vector<double>& stylized,
                         const std::vector<int>& fix) {
  const std::size_t n = content.size();
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double mc = mean(content), ms = mean(stylized);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (stylized[i] - ms) * (content[i] - mc);
    saa += (stylized[i] - ms) * (stylized[i] - ms);
    sbb += (content[i] - mc) * (content[i] - mc);
  }
  Saliency out{};
  out.cc = sab / std::sqrt(saa * sbb);

  const double tc = std::accumulate(content.begin(), content.end(), 0.0);
  const double ts = std::accumulate(stylized.begin(), stylized.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = content[i] / tc, p = stylized[i] / ts;
    out.sim += std::min(p, q);
    if (q > 0) out.kl += q * std::log(q / (p + 1e-12));
  }

  const double sd = std::sqrt(saa / (n - 1));
  int nf = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (fix[i]) {
      out.nss += (stylized[i] - ms) / sd;
      ++nf;
    }
  out.nss /= nf;

  // ROC with one threshold per fixated score (Judd): TP rate over fixations,
  // FP rate over the remaining pixels whose score reaches the threshold.
  std::vector<double> thresholds;
  for (std::size_t i = 0; i < n; ++i)
    if (fix[i]) thresholds.push_back(stylized[i]);
  std::sort(thresholds.rbegin(), thresholds.rend());
  std::vector<double> tp{0}, fp{0};
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    int above = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (stylized[i] >= thresholds[t]) ++above;
    tp.push_back(static_cast<double>(t + 1) / nf);
    fp.push_back(static_cast<double>(above - static_cast<int>(t + 1)) / (n - nf));
  }
  tp.push_back(1);
  fp.push_back(1);
  for (std::size_t i = 1; i < tp.size(); ++i) out.auc_judd += (fp[i] - fp[i - 1]) * (tp[i] + tp[i - 1]) / 2;
  return out;
}

}  // namespace oracle
