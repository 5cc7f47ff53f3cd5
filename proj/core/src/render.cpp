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

#include "modex/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "modex/error.hpp"
#include "modex/tfa.hpp"

namespace modex {
namespace {

constexpr std::size_t kMargin = 12;
constexpr std::size_t kTickLen = 6;
constexpr double kFreqTickHz = 50e3;
constexpr double kTimeTickMs = 500.0;

double Intensity(const Spectrogram& s, std::size_t i) {
  switch (s.kind()) {
    case SpectrogramKind::kComplex: return 10.0 * std::log10(std::norm(s.cvalues()[i]) + kPowerFloor);
    case SpectrogramKind::kPower: return 10.0 * std::log10(s.values()[i] + kPowerFloor);
    default: return s.values()[i];
  }
}

void DrawTicks(Image& img, const SpectrogramAxes& axes) {
  auto set = [&](std::size_t x, std::size_t y) {
    for (int c = 0; c < img.channels; ++c) {
      img.pixels[(y * img.width + x) * static_cast<std::size_t>(img.channels) + static_cast<std::size_t>(c)] = 255;
    }
  };
  const std::size_t rows = axes.bins();
  for (std::size_t f = 1; f < rows; ++f) {
    if (std::floor(axes.freq_hz[f] / kFreqTickHz) != std::floor(axes.freq_hz[f - 1] / kFreqTickHz)) {
      const std::size_t y = img.height - img.margin_bottom - 1 - f;
      for (std::size_t x = img.margin_left - kTickLen; x < img.margin_left; ++x) set(x, y);
    }
  }
  for (std::size_t t = 1; t < axes.frames(); ++t) {
    if (std::floor(axes.time_ms[t] / kTimeTickMs) != std::floor(axes.time_ms[t - 1] / kTimeTickMs)) {
      const std::size_t x = img.margin_left + t;
      for (std::size_t y = img.height - img.margin_bottom; y < img.height - img.margin_bottom + kTickLen; ++y) {
        set(x, y);
      }
    }
  }
}

}  // namespace

std::string_view ToString(RenderStyle style) {
  switch (style) {
    case RenderStyle::kPowerDb: return "power_db";
    case RenderStyle::kMaskOverlay: return "mask_overlay";
    case RenderStyle::kGated: return "gated";
  }
  return "power_db";
}

RenderStyle RenderStyleFromString(std::string_view s) {
  if (s == "power_db") return RenderStyle::kPowerDb;
  if (s == "mask_overlay") return RenderStyle::kMaskOverlay;
  if (s == "gated") return RenderStyle::kGated;
  throw Error(ErrorCode::kInvalidConfig, "unknown render style '" + std::string(s) + "'");
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

Image RenderImage(const Spectrogram& spec, RenderStyle style, const Spectrogram* mask) {
  if (spec.size() == 0) throw Error(ErrorCode::kDimMismatch, "render: empty spectrogram");
  if (style != RenderStyle::kPowerDb) {
    if (mask == nullptr) throw Error(ErrorCode::kInvalidConfig, "render: style needs a mask");
    mask->ExpectKind({SpectrogramKind::kMask}, "render");
    ExpectSameGrid(spec, *mask, "render");
  }
  const std::size_t bins = spec.bins();
  const std::size_t frames = spec.frames();
  auto selected = [&](std::size_t i) { return mask != nullptr && mask->values()[i] != 0.0; };

  std::vector<double> level(spec.size());
  std::vector<double> pool;
  pool.reserve(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    level[i] = Intensity(spec, i);
    if (style != RenderStyle::kGated || selected(i)) pool.push_back(level[i]);
  }
  const double lo = Percentile(pool, 0.001);
  const double hi = Percentile(pool, 0.999);

  Image img;
  img.channels = style == RenderStyle::kMaskOverlay ? 3 : 1;
  img.margin_left = kMargin;
  img.margin_bottom = kMargin;
  img.width = frames + kMargin;
  img.height = bins + kMargin;
  img.pixels.assign(img.width * img.height * static_cast<std::size_t>(img.channels), 0);

  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      const std::size_t i = t * bins + f;
      std::uint8_t g = 128;
      if (hi > lo) {
        const double u = (std::clamp(level[i], lo, hi) - lo) / (hi - lo);
        g = static_cast<std::uint8_t>(std::lround(255.0 * u));
      }
      if (style == RenderStyle::kGated && !selected(i)) g = 0;
      const std::size_t px = ((img.height - img.margin_bottom - 1 - f) * img.width + img.margin_left + t) *
                             static_cast<std::size_t>(img.channels);
      if (img.channels == 1) {
        img.pixels[px] = g;
      } else if (selected(i)) {
        img.pixels[px] = 255;
        img.pixels[px + 1] = 0;
        img.pixels[px + 2] = 0;
      } else {
        img.pixels[px] = img.pixels[px + 1] = img.pixels[px + 2] = g;
      }
    }
  }
  DrawTicks(img, spec.axes());
  if (style == RenderStyle::kMaskOverlay) {
    // Legend swatch in the lower-left corner.
    for (std::size_t y = img.height - kMargin + 2; y < img.height - 2; ++y) {
      for (std::size_t x = 2; x < kMargin - 2; ++x) img.pixels[(y * img.width + x) * 3] = 255;
    }
  }
  return img;
}

void WritePng(const Image& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  png_set_compression_level(png, 1);
  png_write_info(png, info);
  const std::size_t stride = image.width * static_cast<std::size_t>(image.channels);
  for (std::size_t y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace modex
