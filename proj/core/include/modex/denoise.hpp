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

#ifndef MODEX_DENOISE_HPP_
#define MODEX_DENOISE_HPP_

#include <complex>
#include <cstdint>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modex/spectrogram.hpp"

namespace modex {

// Block-averaged cross-power spectrum of two channels. Matrices are
// block-major: element (f, b) lives at b * bins + f.
struct CpsEstimate {
  std::size_t bins = 0;
  std::size_t blocks = 0;
  std::vector<std::complex<double>> cross_power;
  std::vector<double> coherence;  // in [0, 1]
  std::size_t segments_per_block = 1;
  std::pair<std::string, std::string> channel_pair;

  std::complex<double> cross_at(std::size_t f, std::size_t b) const { return cross_power[b * bins + f]; }
  double coherence_at(std::size_t f, std::size_t b) const { return coherence[b * bins + f]; }
};

// Frames are grouped into consecutive blocks of `block`; a trailing partial
// block is dropped. Frames with a nonzero entry in `exclude` (one per frame,
// or empty) are left out of the block averages; a block with no remaining
// frames has zero cross-power and coherence.
CpsEstimate CrossPower(const Spectrogram& a, const Spectrogram& b, std::size_t block,
                       int threads = 1, std::span<const std::uint8_t> exclude = {});

// Axes of the block grid: frequency unchanged, time = mean of each block's
// frame centers.
SpectrogramAxes BlockAxes(const SpectrogramAxes& axes, std::size_t block);

// Complex output multiplied by a gain in [0, 1]: the median over j != target
// of coherence(target, j), block-wise. Frames past the last full block use
// the last block's gain.
Spectrogram CpsDenoise(std::span<const Spectrogram> stack, std::size_t target, std::size_t block,
                       int threads = 1, std::span<const std::uint8_t> exclude = {});

// Mean over all grid points of sqrt(dt^2 + df^2), forward differences with
// a replicated last row and column.
double TotalVariation(const Spectrogram& spec);

// Multichannel denoiser contract: given k complex spectrograms on one grid,
// return an estimate of channel `target` with identical dims.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::string name() const = 0;
  virtual Spectrogram Denoise(std::span<const Spectrogram> stack, std::size_t target) const = 0;
};

class CpsDenoiser final : public Denoiser {
 public:
  explicit CpsDenoiser(std::size_t block = 16, int threads = 1) : block_(block), threads_(threads) {}
  std::string name() const override { return "cps"; }
  Spectrogram Denoise(std::span<const Spectrogram> stack, std::size_t target) const override {
    return CpsDenoise(stack, target, block_, threads_);
  }
  std::size_t block() const { return block_; }

 private:
  std::size_t block_;
  int threads_;
};

class IdentityDenoiser final : public Denoiser {
 public:
  std::string name() const override { return "none"; }
  Spectrogram Denoise(std::span<const Spectrogram> stack, std::size_t target) const override;
};

// Planes "cross_power" (complex) and "coherence" (real) on the block grid.
Container ToContainer(const CpsEstimate& est, const SpectrogramAxes& spectrogram_axes);

}  // namespace modex

#endif  // MODEX_DENOISE_HPP_
