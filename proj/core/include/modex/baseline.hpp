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

#ifndef MODEX_BASELINE_HPP_
#define MODEX_BASELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modex/spectrogram.hpp"

namespace modex {

struct BaselineConfig {
  double p = 0.001;       // weight of bins above the baseline
  double lambda = 1e6;    // second-difference penalty
  double alpha = 1.0;     // pre-emphasis exponent
  int max_iters = 50;
  double weight_tol = 1e-3;  // stop when this fraction of weights flips
  bool exclude_dc = true;
  double guard_hz = 4000.0;  // low-frequency band excluded from detection

  void Validate() const;
};

struct SliceFit {
  std::vector<double> baseline;
  int iters = 0;
  bool converged = false;
};

// Asymmetric least squares along one log-power column: iteratively solves
// (W + lambda D'D) v = W y with D the second-difference operator and
// w = p where y > v, 1 - p elsewhere.
SliceFit FitBaselineSlice(std::span<const double> column, const BaselineConfig& cfg);

// Adds 10 alpha log10(f / f_ref) to every bin with f > 0, f_ref being the
// first nonzero bin. The DC bin is left unchanged.
Spectrogram PreEmphasize(const Spectrogram& log_power, double alpha);

// Per-slice broadband background in log-power units (frame-major like
// Spectrogram storage).
struct BaselineModel {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> baseline;
  std::vector<double> residual_scale;  // 1.4826 * MAD of each slice's residual
  std::vector<int> iters_used;
  std::vector<std::uint8_t> converged;

  double at(std::size_t f, std::size_t t) const { return baseline[t * bins + f]; }
  std::span<const double> frame(std::size_t t) const { return {baseline.data() + t * bins, bins}; }
};

// Smallest residual scale reported, in dB.
inline constexpr double kMinResidualScale = 1e-6;

// Scaled median absolute deviation.
double RobustScale(std::span<const double> values);

BaselineModel EstimateBaseline(const Spectrogram& log_power, const BaselineConfig& cfg,
                               int threads = 1);

// Count of low bins excluded as guard band: all bins below guard_hz, and at
// least the DC bin.
std::size_t GuardBins(const SpectrogramAxes& axes, double guard_hz);

// (P - V) / residual_scale per slice; guard band annotated.
Spectrogram Whiten(const Spectrogram& log_power, const BaselineModel& model,
                   double guard_hz = 4000.0);

// Complex spectrum with the baseline divided out of the magnitude:
// Z * 10^(-V/20). Phase is untouched.
Spectrogram WhitenComplex(const Spectrogram& spec, const BaselineModel& model);

// Whitened (z-scored) log power of a baseline-normalized complex spectrum,
// i.e. 10 log10(|Zw|^2) / residual_scale.
Spectrogram StandardizeWhitenedComplex(const Spectrogram& whitened_complex,
                                       const BaselineModel& model, double guard_hz = 4000.0);

// Excess of the baseline over its local running level, in robust sigmas:
// (V(t,f) - R(t,f)) / S(t,f), where R and S are the per-bin median and
// scaled MAD of V over consecutive windows of `window_frames` frames.
// Broadband impulses, which the per-slice fit absorbs, stand out here as
// vertical stripes.
Spectrogram BroadbandExcess(const BaselineModel& model, const SpectrogramAxes& axes,
                            double guard_hz = 4000.0, std::size_t window_frames = 256);

Container ToContainer(const BaselineModel& model, const SpectrogramAxes& axes);
BaselineModel BaselineModelFromContainer(const Container& c);

}  // namespace modex

#endif  // MODEX_BASELINE_HPP_
