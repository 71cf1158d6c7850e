// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "aams/error.hpp"
#include "aams/kernels.hpp"
#include "aams/linalg.hpp"
#include "aams/tensor.hpp"
#include "aams/weights.hpp"

namespace aams {

// Largest location count for which the dense N x N energy is built
// (64 x 64 bottleneck, i.e. a 512 x 512 image).
inline constexpr std::size_t kMaxAttentionLocations = 64 * 64;

// Bias-free 1x1 projections. theta_h keeps C channels, theta_u and theta_g
// project to C/2.
struct AttentionParams {
  Filter theta_h;
  Filter theta_u;
  Filter theta_g;
  // Multiplies the energy. 1.0 follows the unscaled dot product; set to
  // 1/sqrt(C/2) for weights trained with a scaled product.
  double energy_scale = 1.0;
  std::size_t max_locations = kMaxAttentionLocations;

  static AttentionParams from_bundle(const WeightBundle& bundle) {
    return {bundle.filter("theta_h"), bundle.filter("theta_u"), bundle.filter("theta_g")};
  }

  void validate(int channels) const {
    auto check_1x1 = [](const Filter& f, const char* name) {
      if (f.kernel_h != 1 || f.kernel_w != 1)
        throw DimensionError(detail::concat(name, " must be a 1x1 projection"));
    };
    check_1x1(theta_h, "theta_h");
    check_1x1(theta_u, "theta_u");
    check_1x1(theta_g, "theta_g");
    if (theta_h.in_channels != channels || theta_u.in_channels != channels || theta_g.in_channels != channels)
      throw DimensionError(detail::concat("attention: feature has ", channels, " channels, projections expect ",
                                          theta_h.in_channels, "/", theta_u.in_channels, "/", theta_g.in_channels));
    if (theta_h.out_channels != channels)
      throw DimensionError("attention: theta_h must preserve the channel count");
    if (theta_u.out_channels != theta_g.out_channels)
      throw DimensionError("attention: theta_u and theta_g output channels differ");
  }
};

// A_x reshaped to the C x H x W layout of the input feature.
struct AttentionFeature {
  Tensor a;
};

namespace detail {

inline Tensor project(const Tensor& f, const Filter& theta) {
  return conv2d(f, theta, {}, 1, Padding::valid, Activation::none);
}

// Channel-major C x H x W viewed as a C x N matrix.
inline Matrix as_channel_rows(const Tensor& t) {
  return Matrix(static_cast<std::size_t>(t.channels()), t.plane(), t.storage());
}

}  // namespace detail

// e = flat(f * theta_u) flat(f * theta_g)^T, N x N.
inline Matrix attention_energy(const Tensor& f, const AttentionParams& params) {
  params.validate(f.channels());
  if (f.plane() > params.max_locations)
    throw ConfigurationError(detail::concat("attention: ", f.plane(), " locations exceed the dense cap of ",
                                            params.max_locations));
  const Matrix u = flatten_locations(detail::project(f, params.theta_u));
  const Matrix g = detail::as_channel_rows(detail::project(f, params.theta_g));
  Matrix e = matmul(u, g);
  if (params.energy_scale != 1.0) {
    const auto s = static_cast<float>(params.energy_scale);
    for (float& v : e.data()) v *= s;
  }
  return e;
}

// Row-stochastic attention weights alpha = softmax_rows(e).
inline Matrix attention_weights(const Tensor& f, const AttentionParams& params) {
  return softmax_rows(attention_energy(f, params));
}

inline AttentionFeature attention_feature(const Tensor& f, const AttentionParams& params) {
  const Matrix alpha = attention_weights(f, params);
  const Matrix h = flatten_locations(detail::project(f, params.theta_h));
  return {unflatten_locations(matmul(alpha, h), f.height(), f.width())};
}

struct AttentionOutput {
  Tensor output;    // O_x = R_x + f
  Tensor residual;  // R_x = A_x (.) f
};

inline AttentionOutput attention_output(const Tensor& f, const AttentionFeature& attention) {
  require_same_shape(f, attention.a, "attention_output");
  AttentionOutput out{Tensor(f.channels(), f.height(), f.width()), Tensor(f.channels(), f.height(), f.width())};
  auto fv = f.data();
  auto av = attention.a.data();
  auto ov = out.output.data();
  auto rv = out.residual.data();
  for (std::size_t i = 0; i < fv.size(); ++i) {
    rv[i] = av[i] * fv[i];
    ov[i] = rv[i] + fv[i];
  }
  return out;
}

}  // namespace aams
