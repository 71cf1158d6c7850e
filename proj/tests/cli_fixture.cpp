// SPDX-License-Identifier: Apache-2.0
// Writes small PNG inputs for the CLI smoke test into the given directory.
#include <cmath>
#include <filesystem>
#include <iostream>

#include "aams/aams.hpp"

namespace {

aams::Tensor pattern(int channels, int h, int w, double phase) {
  aams::Tensor t(channels, h, w);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        t(c, y, x) = static_cast<float>(0.5 + 0.45 * std::sin(phase + 0.19 * (c + 1) * x) * std::cos(0.13 * y - c));
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cli_fixture <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  aams::write_png_rgb((dir / "content.png").string(), pattern(3, 64, 80, 0.0));
  aams::write_png_rgb((dir / "style.png").string(), pattern(3, 72, 72, 1.7));
  aams::write_png_gray((dir / "map_a.png").string(), pattern(1, 16, 16, 0.4));
  aams::write_png_gray((dir / "map_b.png").string(), pattern(1, 16, 16, 0.9));
  return 0;
}
