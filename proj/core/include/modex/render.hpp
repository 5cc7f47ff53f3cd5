// Copyright 2026 The Modex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODEX_RENDER_HPP_
#define MODEX_RENDER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "modex/spectrogram.hpp"

namespace modex {

enum class RenderStyle { kPowerDb, kMaskOverlay, kGated };

std::string_view ToString(RenderStyle style);
RenderStyle RenderStyleFromString(std::string_view s);

// 8-bit raster, row-major from the top. Frequency increases upwards and
// time to the right; the data area starts at (margin_left, 0) and the
// margins carry axis ticks.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;  // 1 gray, 3 RGB
  std::size_t margin_left = 0;
  std::size_t margin_bottom = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t x, std::size_t y, int c = 0) const {
    return pixels[(y * width + x) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
  // Pixel of spectrogram element (f, t).
  std::uint8_t data_at(std::size_t f, std::size_t t, int c = 0) const {
    return at(margin_left + t, height - margin_bottom - 1 - f, c);
  }
};

// Intensity is dB for power and complex input, the raw value for other
// real kinds, clipped to the 0.1 and 99.9 percentiles. kMaskOverlay paints
// mask pixels red over the power_db image; kGated shows only mask pixels.
Image RenderImage(const Spectrogram& spec, RenderStyle style, const Spectrogram* mask = nullptr);

void WritePng(const Image& image, const std::filesystem::path& path);

inline void Render(const Spectrogram& spec, RenderStyle style, const std::filesystem::path& path,
                   const Spectrogram* mask = nullptr) {
  WritePng(RenderImage(spec, style, mask), path);
}

// Linearly interpolated quantile, q in [0, 1].
double Percentile(std::vector<double> values, double q);

}  // namespace modex

#endif  // MODEX_RENDER_HPP_
