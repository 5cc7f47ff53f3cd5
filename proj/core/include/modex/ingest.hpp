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

#ifndef MODEX_INGEST_HPP_
#define MODEX_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace modex {

// One diagnostic channel's raw samples.
struct ChannelSeries {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  double t0_ms = 0.0;
  std::string channel_id;
  std::string shot_id;
  // Sidecar keys other than the four required ones, carried through
  // untouched and echoed into run metadata.
  nlohmann::json extra = nlohmann::json::object();

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Throws MissingMetadata or CorruptSamples when the invariants of
// ChannelSeries do not hold.
void ValidateSeries(const ChannelSeries& series);

// Rejects series shorter than two analysis windows (SeriesTooShort).
void RequireStftLength(const ChannelSeries& series, std::size_t window_len);

// Reads little-endian float32 samples plus a JSON sidecar with
// sample_rate_hz, t0_ms, channel_id and shot_id. An optional `n_samples`
// key is checked against the file length and an optional `encoding` key
// must be "float32le".
ChannelSeries LoadChannel(const std::filesystem::path& data,
                          const std::filesystem::path& sidecar);

void SaveChannel(const ChannelSeries& series, const std::filesystem::path& data,
                 const std::filesystem::path& sidecar);

struct ManifestEntry {
  std::filesystem::path data;
  std::filesystem::path sidecar;
};

// Channel file/sidecar pairs of one shot. Relative paths in the file are
// resolved against the manifest's directory on load.
struct ShotManifest {
  std::string shot_id;
  std::vector<ManifestEntry> channels;
};

ShotManifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const ShotManifest& manifest, const std::filesystem::path& path);

struct DecimationOptions {
  int filter_order = 8;
  double ripple_db = 0.05;
  // Low-pass edge as a fraction of the output Nyquist frequency.
  double cutoff_fraction = 0.8;
};

struct DecimationPlan {
  double input_rate_hz = 0.0;
  double output_rate_hz = 0.0;
  std::size_t factor = 1;
  int filter_order = 8;
  double ripple_db = 0.05;
  double cutoff_fraction = 0.8;

  // Integer-factor plans only; throws NonIntegerFactor otherwise.
  static DecimationPlan Make(double input_rate_hz, double output_rate_hz,
                             const DecimationOptions& options = {});

  // Low-pass edge as a fraction of the input Nyquist frequency.
  double normalized_cutoff() const;
  std::size_t edge_pad() const { return 3 * static_cast<std::size_t>(filter_order); }
};

// Zero-phase Chebyshev Type I anti-alias filtering followed by integer
// downsampling. Factor 1 returns the input unchanged.
ChannelSeries Decimate(const ChannelSeries& series, double target_rate_hz,
                       const DecimationOptions& options = {});

}  // namespace modex

#endif  // MODEX_INGEST_HPP_
