// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "aams/error.hpp"
#include "aams/tensor.hpp"

namespace aams {

namespace detail {

inline std::vector<std::uint8_t> read_png_pixels(const std::string& path, std::uint32_t format, png_image& image) {
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw FormatError("cannot read PNG '" + path + "': " + image.message);
  image.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("cannot decode PNG '" + path + "': " + msg);
  }
  return pixels;
}

inline std::uint8_t to_byte(float v) {
  const float c = std::min(1.0f, std::max(0.0f, std::isfinite(v) ? v : 0.0f));
  return static_cast<std::uint8_t>(std::lround(255.0f * c));
}

inline void write_png_pixels(const std::string& path, std::uint32_t format, int width, int height,
                             const std::vector<std::uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr))
    throw FormatError("cannot write PNG '" + path + "': " + image.message);
}

}  // namespace detail

// Any PNG, converted to 8-bit RGB, as a 3 x H x W tensor in [0,1].
inline Tensor read_png_rgb(const std::string& path) {
  png_image image;
  const auto pixels = detail::read_png_pixels(path, PNG_FORMAT_RGB, image);
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  Tensor t(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        t(c, y, x) = pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0f;
  return t;
}

// Any PNG as a 1 x H x W tensor in [0,1] (luminance).
inline Tensor read_png_gray(const std::string& path) {
  png_image image;
  const auto pixels = detail::read_png_pixels(path, PNG_FORMAT_GRAY, image);
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  Tensor t(1, h, w);
  for (std::size_t i = 0; i < pixels.size(); ++i) t.data()[i] = pixels[i] / 255.0f;
  return t;
}

inline void write_png_rgb(const std::string& path, const Tensor& image) {
  if (image.channels() != 3) throw DimensionError("write_png_rgb: expected 3 channels, got " + image.shape_string());
  const int w = image.width(), h = image.height();
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] = detail::to_byte(image(c, y, x));
  detail::write_png_pixels(path, PNG_FORMAT_RGB, w, h, pixels);
}

// Single-channel map in [0,1] written as round(255 * v).
inline void write_png_gray(const std::string& path, const Tensor& map) {
  if (map.channels() != 1) throw DimensionError("write_png_gray: expected 1 channel, got " + map.shape_string());
  std::vector<std::uint8_t> pixels(map.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = detail::to_byte(map.data()[i]);
  detail::write_png_pixels(path, PNG_FORMAT_GRAY, map.width(), map.height(), pixels);
}

}  // namespace aams
