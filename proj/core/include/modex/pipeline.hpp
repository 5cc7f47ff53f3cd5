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

#ifndef MODEX_PIPELINE_HPP_
#define MODEX_PIPELINE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modex/baseline.hpp"
#include "modex/ingest.hpp"
#include "modex/segment.hpp"
#include "modex/spectrogram.hpp"
#include "modex/tfa.hpp"
#include "modex/threshold.hpp"

namespace modex {

enum class DenoiseMethod { kCps, kNone };

struct DenoiseConfig {
  DenoiseMethod method = DenoiseMethod::kCps;
  std::size_t block = 16;
};

struct ThresholdConfig {
  std::size_t grid_points = 2048;
};

struct SegmentConfig {
  int connectivity = 8;
  std::size_t min_region_pixels = 12;
  double k_mad = 5.0;
  // Frames per reference window of the broadband excess used for
  // transient flagging.
  std::size_t transient_window = 256;
};

struct OutputConfig {
  std::filesystem::path dir = "modex_out";
  // Subset of {csv, jsonl, images, spectrogram-container}.
  std::set<std::string> formats = {"csv", "jsonl"};
  // When false, whitened, whitened_complex and the broadband planes are
  // released once consumed.
  bool keep_intermediates = false;
};

struct PipelineConfig {
  double target_rate_hz = 500000.0;
  StftConfig stft;
  BaselineConfig baseline;
  DenoiseConfig denoise;
  ThresholdConfig threshold;
  SegmentConfig segment;
  OutputConfig output;
  int threads = 1;

  void Validate() const;
};

// Reads the fields present in `j` over `base`. A run-metadata document is
// accepted too: its "config" member is used.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json ToJson(const PipelineConfig& cfg);

// All intermediate products of one channel.
struct ChannelResult {
  std::string channel_id;
  ChannelSeries series;  // after decimation
  Spectrogram power;
  Spectrogram log_power;
  BaselineModel baseline;
  Spectrogram whitened;           // before denoising
  Spectrogram whitened_complex;   // baseline removed, phase kept
  Spectrogram broadband;          // baseline excess over its running level
  Spectrogram broadband_mask;
  TransientProfile transients;
  Spectrogram detection;          // whitened after denoising
  KneeResult knee;
  Spectrogram mask;               // coherent detections plus transient columns
  std::vector<RegionRecord> regions;
  std::vector<std::string> warnings;
  std::string error;  // non-empty on hard failure
  std::map<std::string, double> stage_seconds;
};

struct PipelineResult {
  std::vector<ChannelResult> channels;  // channel_id order
  std::vector<std::string> warnings;
  int exit_code = 0;  // 0 ok, 1 hard failure, 2 warnings
  double seconds = 0.0;
};

// In-memory pipeline over already loaded channels of one shot.
PipelineResult RunPipelineOnSeries(std::vector<ChannelSeries> channels, const PipelineConfig& cfg);

// Loads the manifest, runs the pipeline and writes the configured outputs
// plus run.json into cfg.output.dir.
PipelineResult RunPipeline(const std::filesystem::path& manifest, const PipelineConfig& cfg);

void WriteOutputs(const PipelineResult& result, const PipelineConfig& cfg, const std::string& shot_id);
nlohmann::json RunMetadata(const PipelineResult& result, const PipelineConfig& cfg, const std::string& shot_id);

}  // namespace modex

#endif  // MODEX_PIPELINE_HPP_
