// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aams/error.hpp"

namespace aams {

// Dense C x H x W volume, channel-major, rows contiguous within a channel.
class Tensor {
 public:
  Tensor() = default;

  Tensor(int channels, int height, int width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width) {
    check_dims(channels, height, width);
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
  }

  Tensor(int channels, int height, int width, std::vector<float> data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    check_dims(channels, height, width);
    if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
      throw DimensionError(detail::concat("tensor data length ", data_.size(), " does not match ",
                                          channels, "x", height, "x", width));
    }
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::vector<float>& storage() noexcept { return data_; }
  const std::vector<float>& storage() const noexcept { return data_; }

  std::span<float> channel(int c) noexcept { return {data_.data() + c * plane(), plane()}; }
  std::span<const float> channel(int c) const noexcept {
    return {data_.data() + c * plane(), plane()};
  }

  float& operator()(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
  float operator()(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }

  bool same_shape(const Tensor& other) const noexcept {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }

  std::string shape_string() const {
    return detail::concat(channels_, "x", height_, "x", width_);
  }

  bool all_finite() const noexcept {
    for (float v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  static void check_dims(int c, int h, int w) {
    if (c <= 0 || h <= 0 || w <= 0)
      throw DimensionError(detail::concat("tensor dims must be positive, got ", c, "x", h, "x", w));
  }

  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(detail::concat(what, ": shape ", a.shape_string(), " vs ", b.shape_string()));
}

// Row-major dense matrix.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
      throw DimensionError(detail::concat("matrix data length ", data_.size(), " does not match ",
                                          rows, "x", cols));
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  BasicMatrix transposed() const {
    BasicMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  template <typename U>
  BasicMatrix<U> cast() const {
    return BasicMatrix<U>(rows_, cols_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;
using MatrixD = BasicMatrix<double>;

// Convolution weight block laid out [out_ch][in_ch][kh][kw].
struct Filter {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  std::vector<float> data;

  Filter() = default;
  Filter(int out, int in, int kh, int kw, float fill = 0.0f)
      : out_channels(out), in_channels(in), kernel_h(kh), kernel_w(kw),
        data(static_cast<std::size_t>(out) * in * kh * kw, fill) {}
  Filter(int out, int in, int kh, int kw, std::vector<float> values)
      : out_channels(out), in_channels(in), kernel_h(kh), kernel_w(kw), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(out) * in * kh * kw)
      throw DimensionError(detail::concat("filter data length ", data.size(), " does not match ",
                                          out, "x", in, "x", kh, "x", kw));
  }

  std::size_t per_output() const noexcept {
    return static_cast<std::size_t>(in_channels) * kernel_h * kernel_w;
  }

  float& operator()(int o, int i, int y, int x) noexcept {
    return data[((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + y) * kernel_w + x];
  }
  float operator()(int o, int i, int y, int x) const noexcept {
    return data[((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + y) * kernel_w + x];
  }
};

// Row i of the result holds location i's channel vector (N x C).
inline Matrix flatten_locations(const Tensor& t) {
  const std::size_t n = t.plane();
  Matrix m(n, static_cast<std::size_t>(t.channels()));
  for (int c = 0; c < t.channels(); ++c) {
    auto src = t.channel(c);
    for (std::size_t i = 0; i < n; ++i) m(i, static_cast<std::size_t>(c)) = src[i];
  }
  return m;
}

// Inverse of flatten_locations.
inline Tensor unflatten_locations(const Matrix& m, int height, int width) {
  if (m.rows() != static_cast<std::size_t>(height) * width)
    throw DimensionError(detail::concat("cannot reshape ", m.rows(), " locations to ", height, "x", width));
  Tensor t(static_cast<int>(m.cols()), height, width);
  for (int c = 0; c < t.channels(); ++c) {
    auto dst = t.channel(c);
    for (std::size_t i = 0; i < m.rows(); ++i) dst[i] = m(i, static_cast<std::size_t>(c));
  }
  return t;
}

}  // namespace aams
