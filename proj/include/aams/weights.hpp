// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aams/error.hpp"
#include "aams/tensor.hpp"

namespace aams {

// Pixel convention the engine feeds the encoder: RGB in [0,1], no mean subtraction.
inline constexpr std::string_view kPixelConvention = "rgb01";
inline constexpr std::array<char, 8> kWeightMagic = {'A', 'A', 'M', 'S', 'W', '1', '\0', '\0'};
inline constexpr std::uint32_t kWeightFormatVersion = 1;

// N-d array as stored in a weight file.
struct Blob {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  friend bool operator==(const Blob&, const Blob&) = default;
};

class WeightBundle {
 public:
  std::uint32_t version = kWeightFormatVersion;
  std::string pixel_convention{kPixelConvention};

  void set(const std::string& name, Blob blob) {
    if (auto it = index_.find(name); it != index_.end()) {
      entries_[it->second].second = std::move(blob);
      return;
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(blob));
  }

  void erase(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) return;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].first, i);
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const Blob& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("weight bundle has no entry '" + name + "'");
    return entries_[it->second].second;
  }
  Blob& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("weight bundle has no entry '" + name + "'");
    return entries_[it->second].second;
  }

  // Entries in insertion (file) order.
  const std::vector<std::pair<std::string, Blob>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  Filter filter(const std::string& layer) const {
    const Blob& b = at(layer + ".weight");
    if (b.dims.size() != 4)
      throw ValidationError(detail::concat("'", layer, ".weight' has rank ", b.dims.size(), ", expected 4"));
    return Filter(static_cast<int>(b.dims[0]), static_cast<int>(b.dims[1]), static_cast<int>(b.dims[2]),
                  static_cast<int>(b.dims[3]), b.values);
  }
  std::span<const float> bias(const std::string& layer) const {
    const std::string key = layer + ".bias";
    if (!contains(key)) return {};
    return at(key).values;
  }

  friend bool operator==(const WeightBundle& a, const WeightBundle& b) {
    return a.version == b.version && a.pixel_convention == b.pixel_convention && a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::string, Blob>> entries_;
  std::map<std::string, std::size_t> index_;
};

// A 3x3 (or 1x1) convolution of the autoencoder and its channel counts.
struct LayerSpec {
  std::string_view name;
  std::uint32_t out_channels;
  std::uint32_t in_channels;
  std::uint32_t kernel;
  bool has_bias;
};

inline constexpr std::array<LayerSpec, 9> kEncoderLayers = {{
    {"conv1_1", 64, 3, 3, true},
    {"conv1_2", 64, 64, 3, true},
    {"conv2_1", 128, 64, 3, true},
    {"conv2_2", 128, 128, 3, true},
    {"conv3_1", 256, 128, 3, true},
    {"conv3_2", 256, 256, 3, true},
    {"conv3_3", 256, 256, 3, true},
    {"conv3_4", 256, 256, 3, true},
    {"conv4_1", 512, 256, 3, true},
}};

inline constexpr std::array<LayerSpec, 9> kDecoderLayers = {{
    {"inv_conv4_1", 256, 512, 3, true},
    {"inv_conv3_4", 256, 256, 3, true},
    {"inv_conv3_3", 256, 256, 3, true},
    {"inv_conv3_2", 256, 256, 3, true},
    {"inv_conv3_1", 128, 256, 3, true},
    {"inv_conv2_2", 128, 128, 3, true},
    {"inv_conv2_1", 64, 128, 3, true},
    {"inv_conv1_2", 64, 64, 3, true},
    {"inv_conv1_1", 3, 64, 3, true},
}};

inline constexpr std::array<LayerSpec, 3> kAttentionLayers = {{
    {"theta_h", 512, 512, 1, false},
    {"theta_u", 256, 512, 1, false},
    {"theta_g", 256, 512, 1, false},
}};

// Every (name, dims) pair a complete bundle must carry, in canonical order.
inline std::vector<std::pair<std::string, std::vector<std::uint32_t>>> required_entries() {
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> out;
  auto add = [&](const LayerSpec& l) {
    out.push_back({std::string(l.name) + ".weight", {l.out_channels, l.in_channels, l.kernel, l.kernel}});
    if (l.has_bias) out.push_back({std::string(l.name) + ".bias", {l.out_channels}});
  };
  for (const auto& l : kEncoderLayers) add(l);
  for (const auto& l : kDecoderLayers) add(l);
  for (const auto& l : kAttentionLayers) add(l);
  return out;
}

// Checks completeness, shapes and finiteness; the message lists every offender.
inline void validate_bundle(const WeightBundle& bundle) {
  std::vector<std::string> missing, misshaped, nonfinite;
  for (const auto& [name, dims] : required_entries()) {
    if (!bundle.contains(name)) {
      missing.push_back(name);
      continue;
    }
    const Blob& b = bundle.at(name);
    if (b.dims != dims) misshaped.push_back(name);
  }
  for (const auto& [name, blob] : bundle.entries())
    for (float v : blob.values)
      if (!std::isfinite(v)) {
        nonfinite.push_back(name);
        break;
      }
  if (missing.empty() && misshaped.empty() && nonfinite.empty()) return;
  std::string msg = "invalid weight bundle;";
  auto append = [&](const char* label, const std::vector<std::string>& names) {
    if (names.empty()) return;
    msg += std::string(" ") + label + ":";
    for (const auto& n : names) msg += " " + n;
    msg += ";";
  };
  append("missing", missing);
  append("mis-shaped", misshaped);
  append("non-finite", nonfinite);
  throw ValidationError(msg);
}

inline void require_pixel_convention(const WeightBundle& bundle) {
  if (bundle.pixel_convention != kPixelConvention)
    throw ValidationError("weight bundle expects pixel convention '" + bundle.pixel_convention +
                          "', engine supplies '" + std::string(kPixelConvention) + "'");
}

namespace detail {

template <typename T>
T from_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool take(void* dst, std::size_t n) {
    if (bytes_.size() - pos_ < n) return false;
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  template <typename T>
  bool read(T& out) {
    if (!take(&out, sizeof(T))) return false;
    out = from_little_endian(out);
    return true;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  v = from_little_endian(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace detail

// Parses an AAMS-W1 byte stream without checking layer completeness.
inline WeightBundle parse_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  std::array<char, 8> magic{};
  if (!in.take(magic.data(), magic.size()) || magic != kWeightMagic)
    throw FormatError("weight file: bad magic");
  WeightBundle bundle;
  if (!in.read(bundle.version)) throw FormatError("weight file: truncated header");
  if (bundle.version != kWeightFormatVersion)
    throw FormatError(detail::concat("weight file: unsupported version ", bundle.version));
  std::uint32_t tag_len = 0;
  if (!in.read(tag_len) || in.remaining() < tag_len) throw FormatError("weight file: truncated header");
  bundle.pixel_convention.assign(tag_len, '\0');
  in.take(bundle.pixel_convention.data(), tag_len);
  std::uint32_t count = 0;
  if (!in.read(count)) throw FormatError("weight file: truncated header");

  for (std::uint32_t r = 0; r < count; ++r) {
    auto truncated = [&](const std::string& name) {
      return FormatError(detail::concat("weight file: truncated in record ", r,
                                        name.empty() ? std::string() : " ('" + name + "')"));
    };
    std::uint32_t name_len = 0;
    if (!in.read(name_len) || in.remaining() < name_len) throw truncated("");
    std::string name(name_len, '\0');
    in.take(name.data(), name_len);
    std::uint8_t rank = 0;
    if (!in.read(rank)) throw truncated(name);
    Blob blob;
    blob.dims.resize(rank);
    for (auto& d : blob.dims)
      if (!in.read(d)) throw truncated(name);
    // Saturating product: a huge declared shape must read as truncation, not wrap.
    const std::size_t limit = in.remaining() / sizeof(float);
    std::size_t n = 1;
    for (auto d : blob.dims) {
      if (d != 0 && n > limit / d) throw truncated(name);
      n *= d;
    }
    if (n > limit) throw truncated(name);
    blob.values.resize(n);
    for (auto& v : blob.values) in.read(v);
    if (bundle.contains(name)) throw FormatError(detail::concat("weight file: duplicate record '", name, "'"));
    bundle.set(name, std::move(blob));
  }
  if (in.remaining() != 0)
    throw FormatError(detail::concat("weight file: ", in.remaining(), " trailing bytes after last record"));
  return bundle;
}

// Parses and validates a complete autoencoder bundle.
inline WeightBundle load_weights(std::span<const std::uint8_t> bytes) {
  WeightBundle bundle = parse_weights(bytes);
  validate_bundle(bundle);
  return bundle;
}

inline std::vector<std::uint8_t> save_weights(const WeightBundle& bundle) {
  std::vector<std::uint8_t> out(kWeightMagic.begin(), kWeightMagic.end());
  detail::put<std::uint32_t>(out, bundle.version);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.pixel_convention.size()));
  out.insert(out.end(), bundle.pixel_convention.begin(), bundle.pixel_convention.end());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.size()));
  for (const auto& [name, blob] : bundle.entries()) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(blob.dims.size()));
    for (auto d : blob.dims) detail::put<std::uint32_t>(out, d);
    for (float v : blob.values) detail::put<float>(out, v);
  }
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("short write to '" + path + "'");
}

inline WeightBundle load_weights_file(const std::string& path) { return load_weights(read_file_bytes(path)); }

// He-initialized stand-in weights for every required layer. Used where no
// trained model is at hand: shape checks, determinism and timing runs.
inline WeightBundle make_random_bundle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  WeightBundle bundle;
  for (const auto& [name, dims] : required_entries()) {
    Blob b;
    b.dims = dims;
    b.values.resize(b.element_count());
    if (dims.size() == 1) {
      std::uniform_real_distribution<float> dist(0.0f, 0.02f);
      for (auto& v : b.values) v = dist(rng);
    } else {
      const double fan_in = static_cast<double>(dims[1]) * dims[2] * dims[3];
      const bool projection = name.rfind("theta_", 0) == 0;
      const double stddev = projection ? 1.0 / fan_in : std::sqrt(2.0 / fan_in);
      std::normal_distribution<float> dist(0.0f, static_cast<float>(stddev));
      for (auto& v : b.values) v = dist(rng);
    }
    bundle.set(name, std::move(b));
  }
  return bundle;
}

}  // namespace aams
