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

#include "modex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "modex/denoise.hpp"
#include "modex/error.hpp"
#include "modex/parallel.hpp"
#include "modex/render.hpp"
#include "modex/version.hpp"

namespace modex {
namespace {

using Clock = std::chrono::steady_clock;

const std::set<std::string> kFormats = {"csv", "jsonl", "images", "spectrogram-container"};

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename T>
void Read(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void OpenFor(std::ofstream& os, const std::filesystem::path& p) {
  os.open(p, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
}

// Stages up to the whitened complex spectrum.
void FrontEnd(const ChannelSeries& input, const PipelineConfig& cfg, int threads, ChannelResult& r) {
  auto t0 = Clock::now();
  ValidateSeries(input);
  DecimationOptions dec;
  r.series = Decimate(input, cfg.target_rate_hz, dec);
  RequireStftLength(r.series, cfg.stft.window_len);
  r.stage_seconds["decimate"] = Since(t0);

  t0 = Clock::now();
  Spectrogram z = Stft(r.series, cfg.stft, threads);
  r.power = Power(z);
  r.log_power = LogPower(z);
  r.stage_seconds["stft"] = Since(t0);

  t0 = Clock::now();
  r.baseline = EstimateBaseline(r.log_power, cfg.baseline, threads);
  r.whitened = Whiten(r.log_power, r.baseline, cfg.baseline.guard_hz);
  r.whitened_complex = WhitenComplex(z, r.baseline);
  r.stage_seconds["baseline"] = Since(t0);

  // Broadband impulses are separated from the baseline before denoising.
  t0 = Clock::now();
  r.broadband = BroadbandExcess(r.baseline, r.log_power.axes(), cfg.baseline.guard_hz, cfg.segment.transient_window);
  try {
    r.broadband_mask = ApplyThreshold(r.broadband, KneeThreshold(r.broadband, cfg.threshold.grid_points));
    r.transients = FlagTransients(r.broadband, r.broadband_mask, cfg.segment.k_mad);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateDistribution) throw;
    r.broadband_mask = r.broadband.Like(SpectrogramKind::kMask);
    r.transients.column_score.assign(r.broadband.frames(), 0.0);
  }
  r.stage_seconds["transients"] = Since(t0);
}

void BackEnd(const PipelineConfig& cfg, ChannelResult& r) {
  auto t0 = Clock::now();
  const auto [lo, hi] = std::minmax_element(r.log_power.values().begin(), r.log_power.values().end());
  try {
    if (*lo == *hi) throw Error(ErrorCode::kDegenerateDistribution, "channel power is constant; nothing to threshold");
    r.knee = KneeThreshold(r.detection, cfg.threshold.grid_points);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateDistribution) throw;
    r.warnings.push_back(e.what());
    r.mask = r.detection.Like(SpectrogramKind::kMask);
    r.stage_seconds["threshold"] = Since(t0);
    return;
  }
  r.mask = ApplyThreshold(r.detection, r.knee);
  r.stage_seconds["threshold"] = Since(t0);

  t0 = Clock::now();
  const auto conn = static_cast<Connectivity>(cfg.segment.connectivity);
  auto regions = MeasureRegions(LabelRegions(r.mask, conn, cfg.segment.min_region_pixels), r.power, r.transients);
  // Transient regions: the broadband mask over the frames around each flagged frame.
  Spectrogram columns = r.broadband_mask.Like(SpectrogramKind::kMask);
  for (std::size_t t : TransientSpan(r.transients, 0.5 * cfg.segment.k_mad)) {
    auto src = r.broadband_mask.frame(t);
    std::copy(src.begin(), src.end(), columns.frame(t).begin());
  }
  auto transient = MeasureRegions(LabelRegions(columns, conn, cfg.segment.min_region_pixels), r.power, r.transients);
  for (auto& t : transient) t.kind = RegionKind::kTransient;
  regions.insert(regions.end(), std::make_move_iterator(transient.begin()), std::make_move_iterator(transient.end()));
  AssignLabels(regions);
  r.regions = std::move(regions);
  auto m = r.mask.values();
  auto c = columns.values();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (m[i] != 0.0 || c[i] != 0.0) ? 1.0 : 0.0;
  r.stage_seconds["segment"] = Since(t0);
}

}  // namespace

void PipelineConfig::Validate() const {
  if (!(target_rate_hz > 0.0)) throw Error(ErrorCode::kInvalidConfig, "target_rate_hz must be positive");
  stft.Validate();
  baseline.Validate();
  if (denoise.block < 1) throw Error(ErrorCode::kInvalidConfig, "denoise block must be >= 1");
  if (threshold.grid_points < 3) throw Error(ErrorCode::kInvalidConfig, "grid_points must be >= 3");
  if (segment.connectivity != 4 && segment.connectivity != 8) {
    throw Error(ErrorCode::kInvalidConfig, "connectivity must be 4 or 8");
  }
  if (segment.transient_window < 2) throw Error(ErrorCode::kInvalidConfig, "transient_window must be >= 2");
  if (!(segment.k_mad > 0.0)) throw Error(ErrorCode::kInvalidConfig, "k_mad must be positive");
  for (const auto& f : output.formats) {
    if (!kFormats.contains(f)) throw Error(ErrorCode::kInvalidConfig, "unknown output format '" + f + "'");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 1");
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& doc, PipelineConfig c) {
  const nlohmann::json& j = doc.contains("config") && doc.at("config").is_object() ? doc.at("config") : doc;
  try {
    Read(j, "target_rate_hz", c.target_rate_hz);
    Read(j, "threads", c.threads);
    if (j.contains("stft")) {
      const auto& s = j.at("stft");
      Read(s, "window_len", c.stft.window_len);
      Read(s, "overlap_fraction", c.stft.overlap_fraction);
      if (s.contains("window") && s.at("window").get<std::string>() != "hann") {
        throw Error(ErrorCode::kInvalidConfig, "only the hann window is supported");
      }
    }
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      Read(b, "p", c.baseline.p);
      Read(b, "lambda", c.baseline.lambda);
      Read(b, "alpha", c.baseline.alpha);
      Read(b, "max_iters", c.baseline.max_iters);
      Read(b, "weight_tol", c.baseline.weight_tol);
      Read(b, "exclude_dc", c.baseline.exclude_dc);
      Read(b, "guard_hz", c.baseline.guard_hz);
    }
    if (j.contains("denoise")) {
      const auto& d = j.at("denoise");
      if (d.contains("method")) {
        const auto m = d.at("method").get<std::string>();
        if (m == "cps") {
          c.denoise.method = DenoiseMethod::kCps;
        } else if (m == "none") {
          c.denoise.method = DenoiseMethod::kNone;
        } else {
          throw Error(ErrorCode::kInvalidConfig, "denoise method must be cps or none");
        }
      }
      Read(d, "block", c.denoise.block);
    }
    if (j.contains("threshold")) Read(j.at("threshold"), "grid_points", c.threshold.grid_points);
    if (j.contains("segment")) {
      const auto& s = j.at("segment");
      Read(s, "connectivity", c.segment.connectivity);
      Read(s, "min_region_pixels", c.segment.min_region_pixels);
      Read(s, "k_mad", c.segment.k_mad);
      Read(s, "transient_window", c.segment.transient_window);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("dir")) c.output.dir = o.at("dir").get<std::string>();
      if (o.contains("formats")) c.output.formats = o.at("formats").get<std::set<std::string>>();
      if (o.contains("keep_intermediates")) c.output.keep_intermediates = o.at("keep_intermediates").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json ToJson(const PipelineConfig& c) {
  return {
      {"target_rate_hz", c.target_rate_hz},
      {"threads", c.threads},
      {"decimation", {{"filter", "chebyshev1"}, {"order", 8}, {"ripple_db", 0.05}, {"cutoff_fraction", 0.8}}},
      {"stft", {{"window_len", c.stft.window_len}, {"overlap_fraction", c.stft.overlap_fraction}, {"window", "hann"}}},
      {"baseline",
       {{"p", c.baseline.p},
        {"lambda", c.baseline.lambda},
        {"alpha", c.baseline.alpha},
        {"max_iters", c.baseline.max_iters},
        {"weight_tol", c.baseline.weight_tol},
        {"exclude_dc", c.baseline.exclude_dc},
        {"guard_hz", c.baseline.guard_hz}}},
      {"denoise", {{"method", c.denoise.method == DenoiseMethod::kCps ? "cps" : "none"}, {"block", c.denoise.block}}},
      {"threshold", {{"grid_points", c.threshold.grid_points}}},
      {"segment",
       {{"connectivity", c.segment.connectivity},
        {"min_region_pixels", c.segment.min_region_pixels},
        {"k_mad", c.segment.k_mad},
        {"transient_window", c.segment.transient_window},
        {"transient_coverage", 0.3},
        {"transient_frame_fraction", 0.5}}},
      {"output",
       {{"dir", c.output.dir.string()},
        {"formats", c.output.formats},
        {"keep_intermediates", c.output.keep_intermediates}}},
  };
}

PipelineResult RunPipelineOnSeries(std::vector<ChannelSeries> channels, const PipelineConfig& cfg) {
  cfg.Validate();
  const auto start = Clock::now();
  std::stable_sort(channels.begin(), channels.end(),
                   [](const ChannelSeries& a, const ChannelSeries& b) { return a.channel_id < b.channel_id; });
  PipelineResult out;
  out.channels.resize(channels.size());
  const std::size_t k = channels.size();
  if (k == 0) throw Error(ErrorCode::kInvalidConfig, "pipeline needs at least one channel");
  const int inner = std::max(1, cfg.threads / static_cast<int>(k));
  const int outer = std::max(1, cfg.threads / inner);

  ParallelChunks(k, outer, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      ChannelResult& r = out.channels[c];
      r.channel_id = channels[c].channel_id;
      try {
        FrontEnd(channels[c], cfg, inner, r);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  });
  channels.clear();

  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < k; ++c) {
    if (out.channels[c].error.empty()) live.push_back(c);
  }

  // Denoising sees all surviving channels read-only.
  bool use_cps = cfg.denoise.method == DenoiseMethod::kCps;
  if (use_cps && live.size() < 2) {
    out.warnings.push_back("cps denoising needs at least two channels; denoise skipped");
    use_cps = false;
  }
  if (use_cps) {
    const auto t0 = Clock::now();
    std::vector<Spectrogram> stack;
    for (std::size_t c : live) stack.push_back(std::move(out.channels[c].whitened_complex));
    // Frames flagged on any channel are left out of the block averages.
    std::vector<std::uint8_t> exclude(stack.front().frames(), 0);
    for (std::size_t c : live) {
      for (std::size_t t : out.channels[c].transients.flagged_frames) {
        if (t < exclude.size()) exclude[t] = 1;
      }
    }
    try {
      for (std::size_t i = 1; i < stack.size(); ++i) ExpectSameGrid(stack[0], stack[i], "cps_denoise");
      ParallelChunks(live.size(), outer, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          ChannelResult& r = out.channels[live[i]];
          r.detection = StandardizeWhitenedComplex(CpsDenoise(stack, i, cfg.denoise.block, inner, exclude), r.baseline,
                                                   cfg.baseline.guard_hz);
        }
      });
    } catch (const std::exception& e) {
      for (std::size_t c : live) out.channels[c].error = e.what();
      live.clear();
    }
    if (cfg.output.keep_intermediates && live.size() == stack.size()) {
      for (std::size_t i = 0; i < live.size(); ++i) out.channels[live[i]].whitened_complex = std::move(stack[i]);
    }
    const double dt = Since(t0) / static_cast<double>(std::max<std::size_t>(1, stack.size()));
    for (std::size_t c : live) out.channels[c].stage_seconds["denoise"] = dt;
  } else {
    for (std::size_t c : live) {
      out.channels[c].detection = out.channels[c].whitened;
    }
  }

  ParallelChunks(live.size(), outer, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ChannelResult& r = out.channels[live[i]];
      try {
        BackEnd(cfg, r);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      if (!cfg.output.keep_intermediates) {
        r.whitened = Spectrogram();
        r.whitened_complex = Spectrogram();
        r.broadband = Spectrogram();
        r.broadband_mask = Spectrogram();
      }
    }
  });

  bool failed = false, warned = !out.warnings.empty();
  for (const auto& r : out.channels) {
    failed |= !r.error.empty();
    warned |= !r.warnings.empty();
  }
  out.exit_code = failed ? 1 : (warned ? 2 : 0);
  out.seconds = Since(start);
  return out;
}

nlohmann::json RunMetadata(const PipelineResult& result, const PipelineConfig& cfg, const std::string& shot_id) {
  nlohmann::json j;
  j["tool"] = "modex";
  j["version"] = std::string(kVersion);
  j["shot_id"] = shot_id;
  j["config"] = ToJson(cfg);
  j["stage_order"] = {"decimate",       "stft",         "log_power",       "estimate_baseline",
                      "whiten",         "flag_transients", "denoise",       "knee_threshold",
                      "apply_threshold", "label_regions", "measure_regions"};
  j["module_versions"] = {{"ingest", std::string(kVersion)},   {"tfa", std::string(kVersion)},
                          {"baseline", std::string(kVersion)}, {"denoise", std::string(kVersion)},
                          {"threshold", std::string(kVersion)}, {"segment", std::string(kVersion)},
                          {"synth", std::string(kVersion)},    {"cli", std::string(kVersion)}};
  j["amplitude_source"] = "pre-whitening linear power";
  j["exit_code"] = result.exit_code;
  j["warnings"] = result.warnings;
  j["channels"] = nlohmann::json::array();
  for (const auto& r : result.channels) {
    nlohmann::json c;
    c["channel_id"] = r.channel_id;
    c["status"] = !r.error.empty() ? "failed" : (r.warnings.empty() ? "ok" : "warning");
    if (!r.error.empty()) c["error"] = r.error;
    c["warnings"] = r.warnings;
    if (r.error.empty()) {
      c["sample_rate_hz"] = r.series.sample_rate_hz;
      c["bins"] = r.log_power.bins();
      c["frames"] = r.log_power.frames();
      c["guard_bins"] = r.detection.guard_bins();
      std::size_t unconverged = 0;
      double iters = 0.0;
      for (std::size_t t = 0; t < r.baseline.frames; ++t) {
        unconverged += r.baseline.converged[t] ? 0 : 1;
        iters += r.baseline.iters_used[t];
      }
      c["baseline"] = {{"mean_iters", r.baseline.frames ? iters / static_cast<double>(r.baseline.frames) : 0.0},
                       {"unconverged_slices", unconverged}};
      if (!r.knee.cdf_x.empty()) c["knee"] = ToJson(r.knee);
      c["transient_frames"] = r.transients.flagged_frames;
      std::vector<double> times;
      for (std::size_t t : r.transients.flagged_frames) times.push_back(r.log_power.axes().time_ms[t]);
      c["transient_times_ms"] = times;
      std::size_t coherent = 0;
      for (const auto& reg : r.regions) coherent += reg.kind == RegionKind::kCoherent ? 1 : 0;
      c["regions"] = {{"total", r.regions.size()}, {"coherent", coherent}, {"transient", r.regions.size() - coherent}};
    }
    j["channels"].push_back(std::move(c));
  }
  return j;
}

void WriteOutputs(const PipelineResult& result, const PipelineConfig& cfg, const std::string& shot_id) {
  const auto& dir = cfg.output.dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  const auto& fmt = cfg.output.formats;
  for (const auto& r : result.channels) {
    if (!r.error.empty()) continue;
    const std::string stem = r.channel_id;
    if (fmt.contains("csv")) {
      std::ofstream os;
      OpenFor(os, dir / (stem + ".regions.csv"));
      WriteRegionsCsv(os, r.regions);
    }
    if (fmt.contains("jsonl")) {
      std::ofstream os;
      OpenFor(os, dir / (stem + ".regions.jsonl"));
      WriteRegionsJsonl(os, r.regions, true);
    }
    if (fmt.contains("images")) {
      Render(r.power, RenderStyle::kPowerDb, dir / (stem + ".power_db.png"));
      Render(r.power, RenderStyle::kMaskOverlay, dir / (stem + ".mask_overlay.png"), &r.mask);
      Render(r.power, RenderStyle::kGated, dir / (stem + ".gated.png"), &r.mask);
    }
    if (fmt.contains("spectrogram-container")) {
      WriteSpectrogram(r.log_power, dir / (stem + ".log_power.spc"));
      WriteContainer(ToContainer(r.baseline, r.log_power.axes()), dir / (stem + ".baseline.spc"));
      WriteSpectrogram(r.detection, dir / (stem + ".whitened.spc"));
      WriteSpectrogram(r.mask, dir / (stem + ".mask.spc"));
    }
  }
  std::ofstream os;
  OpenFor(os, dir / "run.json");
  os << RunMetadata(result, cfg, shot_id).dump(2) << '\n';
}

PipelineResult RunPipeline(const std::filesystem::path& manifest_path, const PipelineConfig& cfg) {
  const ShotManifest manifest = LoadManifest(manifest_path);
  std::vector<ChannelSeries> channels;
  for (const auto& entry : manifest.channels) channels.push_back(LoadChannel(entry.data, entry.sidecar));
  PipelineResult result = RunPipelineOnSeries(std::move(channels), cfg);
  WriteOutputs(result, cfg, manifest.shot_id);
  return result;
}

}  // namespace modex
