// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "aams/error.hpp"
#include "aams/kernels.hpp"
#include "aams/tensor.hpp"
#include "aams/transforms.hpp"
#include "aams/weights.hpp"

namespace aams {

// Activations captured after relu1_1 .. relu4_1.
struct EncoderTaps {
  Tensor relu1_1;
  Tensor relu2_1;
  Tensor relu3_1;
  Tensor relu4_1;
};

namespace detail {

inline Tensor conv_layer(const Tensor& x, const WeightBundle& bundle, std::string_view layer) {
  const std::string name(layer);
  try {
    return conv2d(x, bundle.filter(name), bundle.bias(name), 1, Padding::reflection_same, Activation::relu);
  } catch (const Error& e) {
    rethrow_with_context(e, name);
  }
}

inline void require_image(const Tensor& image) {
  if (image.channels() != 3)
    throw DimensionError("encode: image must have 3 channels, got " + image.shape_string());
  if (image.height() % 8 != 0 || image.width() % 8 != 0)
    throw DimensionError("encode: image dims must be divisible by 8, got " + image.shape_string());
  for (float v : image.data())
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("encode: image values must lie in [0,1]");
}

}  // namespace detail

// VGG-19 prefix through relu4_1 with average pooling.
inline EncoderTaps encode(const Tensor& image, const WeightBundle& bundle) {
  detail::require_image(image);
  require_pixel_convention(bundle);
  using detail::conv_layer;
  EncoderTaps taps;
  taps.relu1_1 = conv_layer(image, bundle, "conv1_1");
  Tensor x = conv_layer(taps.relu1_1, bundle, "conv1_2");
  taps.relu2_1 = conv_layer(avg_pool2d(x), bundle, "conv2_1");
  x = conv_layer(taps.relu2_1, bundle, "conv2_2");
  taps.relu3_1 = conv_layer(avg_pool2d(x), bundle, "conv3_1");
  x = conv_layer(taps.relu3_1, bundle, "conv3_2");
  x = conv_layer(x, bundle, "conv3_3");
  x = conv_layer(x, bundle, "conv3_4");
  taps.relu4_1 = conv_layer(avg_pool2d(x), bundle, "conv4_1");
  return taps;
}

// Sees the in-flight feature at each skip point ("inv_conv3_2", "inv_conv2_2",
// "inv_conv1_2") before any style enhancement is applied.
using SkipObserver = std::function<void(std::string_view layer, const Tensor& feature)>;

// Mirror of the encoder. With style taps, the feature entering inv_conv3_2,
// inv_conv2_2 and inv_conv1_2 is AdaIN-matched to relu3_1, relu2_1 and
// relu1_1 of the style. Output is clamped to [0,1].
inline Tensor decode(const Tensor& feature, const WeightBundle& bundle, const EncoderTaps* style_taps,
                     const SkipObserver& observer = {}) {
  if (feature.channels() != 512)
    throw DimensionError("decode: bottleneck feature must have 512 channels, got " + feature.shape_string());
  using detail::conv_layer;
  auto skip = [&](Tensor x, std::string_view layer, const Tensor* tap) {
    if (observer) observer(layer, x);
    if (tap) x = adain(x, *tap);
    return x;
  };
  const bool styled = style_taps != nullptr;
  Tensor x = conv_layer(feature, bundle, "inv_conv4_1");
  x = upsample_nearest(x);
  x = conv_layer(x, bundle, "inv_conv3_4");
  x = conv_layer(x, bundle, "inv_conv3_3");
  x = skip(std::move(x), "inv_conv3_2", styled ? &style_taps->relu3_1 : nullptr);
  x = conv_layer(x, bundle, "inv_conv3_2");
  x = conv_layer(x, bundle, "inv_conv3_1");
  x = upsample_nearest(x);
  x = skip(std::move(x), "inv_conv2_2", styled ? &style_taps->relu2_1 : nullptr);
  x = conv_layer(x, bundle, "inv_conv2_2");
  x = conv_layer(x, bundle, "inv_conv2_1");
  x = upsample_nearest(x);
  x = skip(std::move(x), "inv_conv1_2", styled ? &style_taps->relu1_1 : nullptr);
  x = conv_layer(x, bundle, "inv_conv1_2");
  x = conv_layer(x, bundle, "inv_conv1_1");
  for (float& v : x.data()) v = std::min(1.0f, std::max(0.0f, v));
  return x;
}

inline Tensor decode(const Tensor& feature, const WeightBundle& bundle) { return decode(feature, bundle, nullptr); }

inline Tensor decode(const Tensor& feature, const WeightBundle& bundle, const EncoderTaps& style_taps) {
  return decode(feature, bundle, &style_taps);
}

}  // namespace aams
