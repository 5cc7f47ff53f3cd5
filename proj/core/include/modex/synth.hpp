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

#ifndef MODEX_SYNTH_HPP_
#define MODEX_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modex/ingest.hpp"
#include "modex/segment.hpp"
#include "modex/spectrogram.hpp"
#include "modex/tfa.hpp"

namespace modex {

struct ToneSpec {
  double f0_hz = 0.0;  // linear chirp from f0 to f1
  double f1_hz = 0.0;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  double amplitude = 0.0;
  bool shared = true;  // unshared tones appear on `channel` only
  int channel = 0;
  double ramp_s = 2e-3;  // raised-cosine onset and release
};

struct QcBandSpec {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double amplitude = 0.0;  // RMS
  double t_start_s = 0.0;
  double t_end_s = -1.0;  // negative: whole shot
  double ramp_s = 2e-3;
};

struct BackgroundSpec {
  double chi = 0.0;
  double amplitude = 0.0;  // |H| at ref_hz relative to unit white noise
  double ref_hz = 1000.0;
  bool shared = false;
};

struct TransientSpec {
  double t_s = 0.0;
  double width_s = 0.0;
  double amplitude = 0.0;
};

enum class NoiseKind { kGaussian, kLaplacian, kUniform };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  std::vector<double> sigma;  // one per channel, or one for all
};

struct SyntheticShotSpec {
  std::string shot_id = "synthetic";
  double duration_s = 1.0;
  double sample_rate_hz = 500000.0;
  int channels = 1;
  std::vector<ToneSpec> tones;
  std::vector<QcBandSpec> qc_bands;
  BackgroundSpec background;
  std::vector<TransientSpec> transients;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  std::size_t samples() const;
  double sigma(int channel) const;
  // Throws InvalidSpec.
  void Validate() const;
};

SyntheticShotSpec ShotSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const SyntheticShotSpec& spec);

enum class ComponentClass { kCoherent, kQuasiCoherent, kTransient };
std::string_view ToString(ComponentClass c);

struct TruthComponent {
  std::string id;
  ComponentClass cls = ComponentClass::kCoherent;
  double t_start_s = 0.0, t_end_s = 0.0;
  double f_lo_hz = 0.0, f_hi_hz = 0.0;
  double analytic_energy = -1.0;  // negative when not available in closed form
  double measured_energy = 0.0;   // sum of x^2 / fs of the isolated component
  std::size_t peak_frame = 0;     // transients: frame nearest the burst
  std::vector<std::size_t> support;  // frame-major linear indices, ascending
};

struct GroundTruth {
  std::string shot_id;
  SpectrogramAxes axes;
  std::vector<TruthComponent> components;
};

nlohmann::json ToJson(const GroundTruth& truth);
GroundTruth GroundTruthFromJson(const nlohmann::json& j);

// Channels and exact ground truth on the STFT grid of `stft`. Deterministic
// in spec.seed; every random stream is seeded from (seed, stream id) so
// components and channels do not depend on generation order.
std::pair<std::vector<ChannelSeries>, GroundTruth> GenerateShot(const SyntheticShotSpec& spec,
                                                                const StftConfig& stft = {});

// Energy of a raised-cosine-ramped sinusoid: A^2 / 2 * (T - 1.25 r).
double ToneEnergy(const ToneSpec& tone);

struct ClassScore {
  double recall = 0.0;
  double precision = 1.0;
  double f1 = 0.0;
  std::size_t truth_pixels = 0;
  std::size_t predicted_pixels = 0;
  bool precision_undefined = false;  // no predicted pixels
};

struct DetectionScore {
  std::map<std::string, ClassScore> classes;  // "coherent", "transient", "all"
  std::map<std::string, double> component_recall;
};

// Pixel recall |dil(det) & truth| / |truth| and precision
// |det & dil(truth)| / |det|, dilating by one frequency bin. Rows below
// guard_bins are ignored on both sides. Coherent and quasi-coherent truth
// score against coherent regions; transient truth against transient ones.
DetectionScore ScoreDetection(const GroundTruth& truth, const std::vector<RegionRecord>& regions,
                              const SpectrogramAxes& axes, std::size_t guard_bins = 0);

nlohmann::json ToJson(const DetectionScore& score);

}  // namespace modex

#endif  // MODEX_SYNTH_HPP_
