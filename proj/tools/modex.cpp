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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modex/baseline.hpp"
#include "modex/error.hpp"
#include "modex/ingest.hpp"
#include "modex/pipeline.hpp"
#include "modex/render.hpp"
#include "modex/segment.hpp"
#include "modex/synth.hpp"
#include "modex/tfa.hpp"
#include "modex/threshold.hpp"
#include "modex/version.hpp"

namespace {

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw modex::Error(modex::ErrorCode::kIoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw modex::Error(modex::ErrorCode::kIoError, path + ": " + e.what());
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw modex::Error(modex::ErrorCode::kIoError, "cannot write " + path.string());
  os << text;
}

// Pipeline flags shared by every stage subcommand. Unset flags leave the
// config file (or default) value alone.
struct PipelineFlags {
  std::string config;
  std::optional<double> target_rate, p, lambda, alpha, guard_khz, k_mad;
  std::optional<std::string> denoise;
  std::optional<std::size_t> block, grid_points, min_pixels, window;
  std::optional<int> connectivity, threads;

  void Add(CLI::App* app) {
    app->add_option("-c,--config", config, "pipeline config or run-metadata JSON");
    app->add_option("--target-rate", target_rate, "resampling rate in Hz");
    app->add_option("--window", window, "STFT window length");
    app->add_option("--p", p, "baseline asymmetry weight");
    app->add_option("--lambda", lambda, "baseline smoothness penalty");
    app->add_option("--alpha", alpha, "baseline pre-emphasis exponent");
    app->add_option("--guard-khz", guard_khz, "low-frequency guard band in kHz");
    app->add_option("--denoise", denoise, "cps or none")->check(CLI::IsMember({"cps", "none"}));
    app->add_option("--block", block, "frames per CPS block");
    app->add_option("--grid-points", grid_points, "knee CDF resolution");
    app->add_option("--connectivity", connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
    app->add_option("--min-pixels", min_pixels, "smallest region kept");
    app->add_option("--k-mad", k_mad, "transient score threshold in robust sigmas");
    app->add_option("--threads", threads, "worker threads");
  }

  modex::PipelineConfig Resolve() const {
    modex::PipelineConfig cfg;
    if (!config.empty()) cfg = modex::PipelineConfigFromJson(ReadJsonFile(config));
    if (target_rate) cfg.target_rate_hz = *target_rate;
    if (window) cfg.stft.window_len = *window;
    if (p) cfg.baseline.p = *p;
    if (lambda) cfg.baseline.lambda = *lambda;
    if (alpha) cfg.baseline.alpha = *alpha;
    if (guard_khz) cfg.baseline.guard_hz = *guard_khz * 1e3;
    if (denoise) cfg.denoise.method = *denoise == "cps" ? modex::DenoiseMethod::kCps : modex::DenoiseMethod::kNone;
    if (block) cfg.denoise.block = *block;
    if (grid_points) cfg.threshold.grid_points = *grid_points;
    if (connectivity) cfg.segment.connectivity = *connectivity;
    if (min_pixels) cfg.segment.min_region_pixels = *min_pixels;
    if (k_mad) cfg.segment.k_mad = *k_mad;
    if (threads) cfg.threads = *threads;
    cfg.Validate();
    return cfg;
  }
};

modex::SpectrogramKind KindFromString(const std::string& s) {
  for (auto k : {modex::SpectrogramKind::kComplex, modex::SpectrogramKind::kPower, modex::SpectrogramKind::kLogPower,
                 modex::SpectrogramKind::kWhitened, modex::SpectrogramKind::kMask}) {
    if (modex::ToString(k) == s) return k;
  }
  throw modex::Error(modex::ErrorCode::kInvalidConfig, "unknown spectrogram kind '" + s + "'");
}

modex::ChannelSeries LoadManifestChannel(const std::string& manifest_path, const std::string& channel) {
  const auto manifest = modex::LoadManifest(manifest_path);
  for (const auto& e : manifest.channels) {
    auto s = modex::LoadChannel(e.data, e.sidecar);
    if (channel.empty() || s.channel_id == channel) return s;
  }
  throw modex::Error(modex::ErrorCode::kMissingMetadata, "channel '" + channel + "' not in manifest");
}

int RunExtract(const std::string& manifest, const PipelineFlags& flags, const std::string& out_dir,
               const std::vector<std::string>& formats, bool verbose) {
  auto cfg = flags.Resolve();
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  if (!formats.empty()) cfg.output.formats = {formats.begin(), formats.end()};
  cfg.Validate();
  const auto result = modex::RunPipeline(manifest, cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : result.channels) {
    for (const auto& w : c.warnings) std::cerr << "warning: " << c.channel_id << ": " << w << '\n';
    if (!c.error.empty()) std::cerr << "error: " << c.channel_id << ": " << c.error << '\n';
    if (verbose) {
      std::cerr << c.channel_id << ':';
      for (const auto& [stage, sec] : c.stage_seconds) std::fprintf(stderr, " %s=%.3fs", stage.c_str(), sec);
      std::cerr << '\n';
    }
  }
  std::fprintf(stderr, "processed %zu channel(s) in %.3f s\n", result.channels.size(), result.seconds);
  return result.exit_code;
}

int RunSynth(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  auto spec = modex::ShotSpecFromJson(ReadJsonFile(spec_path));
  if (seed) spec.seed = *seed;
  auto [channels, truth] = modex::GenerateShot(spec);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  modex::ShotManifest manifest;
  manifest.shot_id = spec.shot_id;
  for (const auto& c : channels) {
    const auto data = dir / (c.channel_id + ".f32");
    const auto side = dir / (c.channel_id + ".json");
    modex::SaveChannel(c, data, side);
    manifest.channels.push_back({data.filename(), side.filename()});
  }
  modex::SaveManifest(manifest, dir / "manifest.json");
  WriteText(dir / "truth.json", modex::ToJson(truth).dump() + "\n");
  WriteText(dir / "shot_spec.json", modex::ToJson(spec).dump(2) + "\n");
  std::cerr << "wrote " << channels.size() << " channel(s) to " << dir.string() << '\n';
  return 0;
}

int RunScore(const std::string& truth_path, const std::string& regions_path, double guard_khz) {
  const auto truth = modex::GroundTruthFromJson(ReadJsonFile(truth_path));
  std::ifstream is(regions_path);
  if (!is) throw modex::Error(modex::ErrorCode::kIoError, "cannot open " + regions_path);
  const auto regions = modex::ReadRegionsJsonl(is);
  const auto guard = modex::GuardBins(truth.axes, guard_khz * 1e3);
  const auto score = modex::ScoreDetection(truth, regions, truth.axes, guard);
  std::cout << modex::ToJson(score).dump(2) << '\n';
  return 0;
}

int RunRender(const std::string& input, const std::string& style, const std::string& mask_path,
              const std::string& out) {
  const auto spec = modex::ReadSpectrogram(input);
  std::optional<modex::Spectrogram> mask;
  if (!mask_path.empty()) mask = modex::ReadSpectrogram(mask_path);
  modex::Render(spec, modex::RenderStyleFromString(style), out, mask ? &*mask : nullptr);
  return 0;
}

int RunStft(const std::string& manifest, const std::string& channel, const PipelineFlags& flags,
            const std::string& kind, const std::string& out) {
  const auto cfg = flags.Resolve();
  auto series = modex::Decimate(LoadManifestChannel(manifest, channel), cfg.target_rate_hz);
  modex::RequireStftLength(series, cfg.stft.window_len);
  auto z = modex::Stft(series, cfg.stft, cfg.threads);
  switch (KindFromString(kind)) {
    case modex::SpectrogramKind::kComplex: modex::WriteSpectrogram(z, out); break;
    case modex::SpectrogramKind::kPower: modex::WriteSpectrogram(modex::Power(z), out); break;
    case modex::SpectrogramKind::kLogPower: modex::WriteSpectrogram(modex::LogPower(z), out); break;
    default: throw modex::Error(modex::ErrorCode::kInvalidConfig, "stft writes complex, power or log_power");
  }
  return 0;
}

int RunBaseline(const std::string& input, const PipelineFlags& flags, const std::string& model_out,
                const std::string& whitened_out) {
  const auto cfg = flags.Resolve();
  auto spec = modex::ReadSpectrogram(input);
  if (spec.kind() == modex::SpectrogramKind::kComplex) spec = modex::LogPower(spec);
  if (spec.kind() == modex::SpectrogramKind::kPower) {
    modex::Spectrogram lp = spec.Like(modex::SpectrogramKind::kLogPower);
    for (std::size_t i = 0; i < spec.size(); ++i) lp.values()[i] = 10.0 * std::log10(spec.values()[i] + modex::kPowerFloor);
    spec = std::move(lp);
  }
  const auto model = modex::EstimateBaseline(spec, cfg.baseline, cfg.threads);
  if (!model_out.empty()) modex::WriteContainer(modex::ToContainer(model, spec.axes()), model_out);
  if (!whitened_out.empty()) modex::WriteSpectrogram(modex::Whiten(spec, model, cfg.baseline.guard_hz), whitened_out);
  return 0;
}

int RunThreshold(const std::string& input, const PipelineFlags& flags, const std::string& mask_out,
                 const std::string& knee_out, bool with_grid) {
  const auto cfg = flags.Resolve();
  const auto spec = modex::ReadSpectrogram(input);
  const auto knee = modex::KneeThreshold(spec, cfg.threshold.grid_points);
  if (!mask_out.empty()) modex::WriteSpectrogram(modex::ApplyThreshold(spec, knee), mask_out);
  const std::string text = modex::ToJson(knee, with_grid).dump(2) + "\n";
  if (knee_out.empty()) {
    std::cout << text;
  } else {
    WriteText(knee_out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated extraction of coherent and transient events from multichannel spectrograms"};
  app.set_version_flag("--version", std::string(modex::kVersion));
  app.require_subcommand(1);

  PipelineFlags extract_flags, stft_flags, baseline_flags, threshold_flags;
  std::string manifest, out_dir, spec_path, truth_path, regions_path, input, style = "power_db", mask_path, out,
      channel, kind = "log_power", model_out, whitened_out, knee_out;
  std::vector<std::string> formats;
  std::optional<std::uint64_t> seed;
  double guard_khz = 4.0;
  bool with_grid = false;
  bool verbose = false;

  auto* extract = app.add_subcommand("extract", "run the full pipeline on a shot manifest");
  extract->add_option("manifest", manifest, "shot manifest JSON")->required();
  extract->add_option("-o,--out", out_dir, "output directory");
  extract->add_option("--formats", formats, "csv, jsonl, images, spectrogram-container")->delimiter(',');
  extract->add_flag("-v,--verbose", verbose, "print per-stage timings");
  extract_flags.Add(extract);

  auto* synth = app.add_subcommand("synth", "generate a synthetic shot");
  synth->add_option("spec", spec_path, "synthetic shot spec JSON")->required();
  synth->add_option("-o,--out", out_dir, "output directory")->required();
  synth->add_option("--seed", seed, "override the spec seed");

  auto* score = app.add_subcommand("score", "score a region database against ground truth");
  score->add_option("truth", truth_path, "truth.json from synth")->required();
  score->add_option("regions", regions_path, "regions JSONL from extract")->required();
  score->add_option("--guard-khz", guard_khz, "guard band ignored when scoring");

  auto* render = app.add_subcommand("render", "render a spectrogram container to PNG");
  render->add_option("input", input, "spectrogram container")->required();
  render->add_option("--style", style, "power_db, mask_overlay or gated");
  render->add_option("--mask", mask_path, "mask container");
  render->add_option("-o,--out", out, "PNG path")->required();

  auto* stft = app.add_subcommand("stft", "decimate and transform one channel");
  stft->add_option("manifest", manifest, "shot manifest JSON")->required();
  stft->add_option("--channel", channel, "channel id (default: first)");
  stft->add_option("--kind", kind, "complex, power or log_power");
  stft->add_option("-o,--out", out, "container path")->required();
  stft_flags.Add(stft);

  auto* baseline = app.add_subcommand("baseline", "fit and remove the broadband baseline");
  baseline->add_option("input", input, "log-power (or complex/power) container")->required();
  baseline->add_option("--model-out", model_out, "baseline model container");
  baseline->add_option("--whitened-out", whitened_out, "whitened spectrogram container");
  baseline_flags.Add(baseline);

  auto* threshold = app.add_subcommand("threshold", "knee threshold of a whitened spectrogram");
  threshold->add_option("input", input, "whitened container")->required();
  threshold->add_option("--mask-out", out, "mask container");
  threshold->add_option("--knee-out", knee_out, "knee diagnostics JSON (default: stdout)");
  threshold->add_flag("--with-grid", with_grid, "include the sampled CDF");
  threshold_flags.Add(threshold);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return RunExtract(manifest, extract_flags, out_dir, formats, verbose);
    if (*synth) return RunSynth(spec_path, out_dir, seed);
    if (*score) return RunScore(truth_path, regions_path, guard_khz);
    if (*render) return RunRender(input, style, mask_path, out);
    if (*stft) return RunStft(manifest, channel, stft_flags, kind, out);
    if (*baseline) return RunBaseline(input, baseline_flags, model_out, whitened_out);
    if (*threshold) return RunThreshold(input, threshold_flags, out, knee_out, with_grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
