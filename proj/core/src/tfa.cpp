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

#include "modex/tfa.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "modex/error.hpp"
#include "modex/parallel.hpp"

namespace modex {

std::size_t StftConfig::hop() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(window_len) * (1.0 - overlap_fraction)));
}

void StftConfig::Validate() const {
  if (window_len < 2 || window_len % 2 != 0) {
    throw Error(ErrorCode::kInvalidConfig, "window_len must be even and >= 2");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "overlap_fraction must be in [0, 1)");
  }
  const double exact = static_cast<double>(window_len) * (1.0 - overlap_fraction);
  if (hop() == 0 || std::abs(exact - static_cast<double>(hop())) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "window_len * (1 - overlap) must be a positive integer");
  }
}

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::size_t FrameCount(std::size_t samples, std::size_t window_len, std::size_t hop) {
  if (samples < window_len) return 0;
  return (samples - window_len) / hop + 1;
}

SpectrogramAxes StftAxes(std::size_t samples, double sample_rate_hz, double t0_ms,
                         const StftConfig& cfg) {
  SpectrogramAxes axes;
  axes.window_len = cfg.window_len;
  axes.hop = cfg.hop();
  axes.sample_rate_hz = sample_rate_hz;
  axes.freq_hz.resize(cfg.bins());
  for (std::size_t k = 0; k < axes.freq_hz.size(); ++k) {
    axes.freq_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(cfg.window_len);
  }
  const std::size_t frames = FrameCount(samples, cfg.window_len, axes.hop);
  axes.time_ms.resize(frames);
  const double half = static_cast<double>(cfg.window_len) / 2.0;
  for (std::size_t t = 0; t < frames; ++t) {
    axes.time_ms[t] = t0_ms + 1e3 * (static_cast<double>(t * axes.hop) + half) / sample_rate_hz;
  }
  return axes;
}

Spectrogram Stft(const ChannelSeries& series, const StftConfig& cfg, int threads) {
  cfg.Validate();
  const std::size_t n = cfg.window_len;
  if (series.samples.size() < n) {
    throw Error(ErrorCode::kSeriesTooShort,
                "STFT needs at least " + std::to_string(n) + " samples, got " +
                    std::to_string(series.samples.size()));
  }
  Spectrogram out(SpectrogramKind::kComplex,
                  StftAxes(series.samples.size(), series.sample_rate_hz, series.t0_ms, cfg));
  const std::vector<double> window = HannWindow(n);
  const std::size_t hop = cfg.hop();

  ParallelChunks(out.frames(), threads, [&](std::size_t begin, std::size_t end) {
    detail::RealFft fft(n);
    std::vector<double> buf(n);
    for (std::size_t t = begin; t < end; ++t) {
      const double* x = series.samples.data() + t * hop;
      for (std::size_t i = 0; i < n; ++i) buf[i] = window[i] * x[i];
      fft.Forward(buf, out.cframe(t));
    }
  });
  return out;
}

Spectrogram LogPower(const Spectrogram& spec) {
  spec.ExpectKind({SpectrogramKind::kComplex}, "log_power");
  Spectrogram out = spec.Like(SpectrogramKind::kLogPower);
  auto z = spec.cvalues();
  auto v = out.values();
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = 10.0 * std::log10(std::norm(z[i]) + kPowerFloor);
  return out;
}

Spectrogram Power(const Spectrogram& spec) {
  spec.ExpectKind({SpectrogramKind::kComplex}, "power");
  Spectrogram out = spec.Like(SpectrogramKind::kPower);
  auto z = spec.cvalues();
  auto v = out.values();
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = std::norm(z[i]);
  return out;
}

std::vector<double> Welch(const Spectrogram& spec) {
  spec.ExpectKind({SpectrogramKind::kComplex}, "welch");
  if (spec.frames() == 0) throw Error(ErrorCode::kDimMismatch, "welch needs at least one frame");
  std::vector<double> acc(spec.bins(), 0.0);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    auto z = spec.cframe(t);
    for (std::size_t f = 0; f < acc.size(); ++f) acc[f] += std::norm(z[f]);
  }
  for (double& a : acc) a /= static_cast<double>(spec.frames());
  return acc;
}

}  // namespace modex
