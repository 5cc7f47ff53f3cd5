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

#include "modex/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "modex/error.hpp"
#include "modex/iir.hpp"

namespace modex {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "channel files are read as native little-endian float32");

constexpr const char* kRequiredKeys[] = {"sample_rate_hz", "t0_ms", "channel_id", "shot_id"};

json ReadJsonFile(const fs::path& path, ErrorCode missing_code) {
  std::ifstream in(path);
  if (!in) throw Error(missing_code, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(missing_code, path.string() + " is not valid JSON: " + e.what());
  }
}

void WriteJsonFile(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace

void ValidateSeries(const ChannelSeries& series) {
  if (!(series.sample_rate_hz > 0.0) || !std::isfinite(series.sample_rate_hz)) {
    throw Error(ErrorCode::kMissingMetadata, "sample_rate_hz must be positive");
  }
  if (series.samples.empty()) {
    throw Error(ErrorCode::kCorruptSamples, "channel has no samples");
  }
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    if (!std::isfinite(series.samples[i])) {
      throw Error(ErrorCode::kCorruptSamples,
                  "non-finite sample at index " + std::to_string(i));
    }
  }
}

void RequireStftLength(const ChannelSeries& series, std::size_t window_len) {
  if (series.samples.size() < 2 * window_len) {
    throw Error(ErrorCode::kSeriesTooShort,
                "channel " + series.channel_id + " has " + std::to_string(series.samples.size()) +
                    " samples, needs at least " + std::to_string(2 * window_len));
  }
}

ChannelSeries LoadChannel(const fs::path& data, const fs::path& sidecar) {
  if (!fs::exists(sidecar)) {
    throw Error(ErrorCode::kMissingMetadata, "sidecar " + sidecar.string() + " not found");
  }
  const json meta = ReadJsonFile(sidecar, ErrorCode::kMissingMetadata);
  if (!meta.is_object()) throw Error(ErrorCode::kMissingMetadata, "sidecar must be a JSON object");
  for (const char* key : kRequiredKeys) {
    if (!meta.contains(key)) {
      throw Error(ErrorCode::kMissingMetadata, std::string("sidecar lacks '") + key + "'");
    }
  }
  if (!meta["sample_rate_hz"].is_number() || !meta["t0_ms"].is_number() ||
      !meta["channel_id"].is_string() || !meta["shot_id"].is_string()) {
    throw Error(ErrorCode::kMissingMetadata, "sidecar field has the wrong type");
  }
  if (meta.contains("encoding") && meta["encoding"] != "float32le") {
    throw Error(ErrorCode::kUnsupportedEncoding,
                "encoding " + meta["encoding"].dump() + " is not float32le");
  }

  ChannelSeries series;
  series.sample_rate_hz = meta["sample_rate_hz"].get<double>();
  series.t0_ms = meta["t0_ms"].get<double>();
  series.channel_id = meta["channel_id"].get<std::string>();
  series.shot_id = meta["shot_id"].get<std::string>();
  for (const auto& [key, value] : meta.items()) {
    bool required = false;
    for (const char* r : kRequiredKeys) required = required || key == r;
    if (!required) series.extra[key] = value;
  }
  if (!(series.sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::kMissingMetadata, "sample_rate_hz must be positive");
  }

  std::ifstream in(data, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + data.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(float) != 0) {
    throw Error(ErrorCode::kCorruptSamples,
                data.string() + " size is not a multiple of 4 bytes");
  }
  const std::size_t n = bytes.size() / sizeof(float);
  if (meta.contains("n_samples") && meta["n_samples"].get<std::size_t>() != n) {
    throw Error(ErrorCode::kCorruptSamples,
                "file holds " + std::to_string(n) + " samples, sidecar declares " +
                    meta["n_samples"].dump());
  }
  series.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v;
    std::memcpy(&v, bytes.data() + i * sizeof(float), sizeof(float));
    series.samples[i] = v;
  }
  ValidateSeries(series);
  return series;
}

void SaveChannel(const ChannelSeries& series, const fs::path& data, const fs::path& sidecar) {
  std::ofstream out(data, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + data.string());
  for (double s : series.samples) {
    const float v = static_cast<float>(s);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + data.string());

  json meta = series.extra;
  meta["sample_rate_hz"] = series.sample_rate_hz;
  meta["t0_ms"] = series.t0_ms;
  meta["channel_id"] = series.channel_id;
  meta["shot_id"] = series.shot_id;
  meta["n_samples"] = series.samples.size();
  meta["encoding"] = "float32le";
  WriteJsonFile(meta, sidecar);
}

ShotManifest LoadManifest(const fs::path& path) {
  const json j = ReadJsonFile(path, ErrorCode::kMissingMetadata);
  if (!j.is_object() || !j.contains("channels") || !j["channels"].is_array()) {
    throw Error(ErrorCode::kMissingMetadata, "manifest needs a 'channels' array");
  }
  ShotManifest m;
  m.shot_id = j.value("shot_id", "");
  const fs::path base = path.parent_path();
  for (const json& c : j["channels"]) {
    if (!c.contains("data") || !c.contains("sidecar")) {
      throw Error(ErrorCode::kMissingMetadata, "manifest entry needs 'data' and 'sidecar'");
    }
    fs::path data = c["data"].get<std::string>();
    fs::path side = c["sidecar"].get<std::string>();
    if (data.is_relative()) data = base / data;
    if (side.is_relative()) side = base / side;
    m.channels.push_back({data, side});
  }
  return m;
}

void SaveManifest(const ShotManifest& manifest, const fs::path& path) {
  json j;
  j["shot_id"] = manifest.shot_id;
  j["channels"] = json::array();
  const fs::path base = path.parent_path();
  for (const ManifestEntry& e : manifest.channels) {
    j["channels"].push_back({{"data", fs::proximate(e.data, base).string()},
                             {"sidecar", fs::proximate(e.sidecar, base).string()}});
  }
  WriteJsonFile(j, path);
}

DecimationPlan DecimationPlan::Make(double input_rate_hz, double output_rate_hz,
                                    const DecimationOptions& options) {
  if (!(input_rate_hz > 0.0) || !(output_rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "decimation rates must be positive");
  }
  const double ratio = input_rate_hz / output_rate_hz;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 ||
      std::abs(input_rate_hz / rounded - output_rate_hz) / output_rate_hz >= 1e-9) {
    std::ostringstream msg;
    msg << input_rate_hz << " Hz is not an integer multiple of " << output_rate_hz << " Hz";
    throw Error(ErrorCode::kNonIntegerFactor, msg.str());
  }
  DecimationPlan plan;
  plan.input_rate_hz = input_rate_hz;
  plan.output_rate_hz = output_rate_hz;
  plan.factor = static_cast<std::size_t>(rounded);
  plan.filter_order = options.filter_order;
  plan.ripple_db = options.ripple_db;
  plan.cutoff_fraction = options.cutoff_fraction;
  return plan;
}

double DecimationPlan::normalized_cutoff() const {
  return cutoff_fraction / static_cast<double>(factor);
}

ChannelSeries Decimate(const ChannelSeries& series, double target_rate_hz,
                       const DecimationOptions& options) {
  const DecimationPlan plan = DecimationPlan::Make(series.sample_rate_hz, target_rate_hz, options);
  if (plan.factor == 1) return series;

  if (series.samples.size() < plan.edge_pad()) {
    throw Error(ErrorCode::kSeriesTooShort,
                "decimation needs at least " + std::to_string(plan.edge_pad()) + " samples");
  }
  const iir::Sos sos =
      iir::DesignChebyshev1Lowpass(plan.filter_order, plan.ripple_db, plan.normalized_cutoff());
  const std::size_t pad = std::min(plan.edge_pad(), series.samples.size() - 1);
  const std::vector<double> filtered = iir::FiltFilt(sos, series.samples, pad);

  ChannelSeries out;
  out.sample_rate_hz = target_rate_hz;
  out.t0_ms = series.t0_ms;
  out.channel_id = series.channel_id;
  out.shot_id = series.shot_id;
  out.extra = series.extra;
  out.samples.reserve(filtered.size() / plan.factor + 1);
  for (std::size_t i = 0; i < filtered.size(); i += plan.factor) out.samples.push_back(filtered[i]);
  return out;
}

}  // namespace modex
