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

#ifndef MODEX_TFA_HPP_
#define MODEX_TFA_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "modex/ingest.hpp"
#include "modex/spectrogram.hpp"

namespace modex {

enum class WindowKind { kHann };

struct StftConfig {
  std::size_t window_len = 1024;
  double overlap_fraction = 0.875;
  WindowKind window = WindowKind::kHann;

  // window_len * (1 - overlap_fraction); Validate() checks it is a positive
  // integer.
  std::size_t hop() const;
  std::size_t bins() const { return window_len / 2 + 1; }
  void Validate() const;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> HannWindow(std::size_t n);

// Number of whole frames; trailing partial frames are dropped.
std::size_t FrameCount(std::size_t samples, std::size_t window_len, std::size_t hop);

// Axes of the one-sided STFT grid for a series of `samples` samples.
SpectrogramAxes StftAxes(std::size_t samples, double sample_rate_hz, double t0_ms,
                         const StftConfig& cfg);

// Complex one-sided STFT. Frame t covers samples [t*hop, t*hop + N).
Spectrogram Stft(const ChannelSeries& series, const StftConfig& cfg, int threads = 1);

// 10 log10(|Z|^2 + 1e-20).
Spectrogram LogPower(const Spectrogram& spec);

// |Z|^2.
Spectrogram Power(const Spectrogram& spec);

// Time average of |Z|^2 per bin.
std::vector<double> Welch(const Spectrogram& spec);

inline constexpr double kPowerFloor = 1e-20;

}  // namespace modex

#endif  // MODEX_TFA_HPP_
