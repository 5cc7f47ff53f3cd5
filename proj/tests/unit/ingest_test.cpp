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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>

#include "modex/error.hpp"
#include "test_util.hpp"

namespace modex {
namespace {

using testing::Series;
using testing::Sine;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no modex::Error thrown";
  return ErrorCode::kIoError;
}

void WriteJson(const std::filesystem::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(); }

void WriteFloats(const std::filesystem::path& p, const std::vector<float>& v) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
}

nlohmann::json Sidecar(double rate = 500000.0) {
  return {{"sample_rate_hz", rate}, {"t0_ms", 0.0}, {"channel_id", "ch0"}, {"shot_id", "s1"}};
}

TEST(LoadChannel, FourSecondsAt500kHz) {
  TempDir dir("ingest");
  WriteFloats(dir / "a.f32", std::vector<float>(2000000, 0.25f));
  WriteJson(dir / "a.json", Sidecar());
  const ChannelSeries s = LoadChannel(dir / "a.f32", dir / "a.json");
  EXPECT_EQ(s.samples.size(), 2000000u);
  EXPECT_DOUBLE_EQ(s.duration_s(), 4.0);
  EXPECT_EQ(s.channel_id, "ch0");
  EXPECT_EQ(s.shot_id, "s1");
}

TEST(LoadChannel, MetadataErrors) {
  TempDir dir("ingest");
  WriteFloats(dir / "a.f32", std::vector<float>(64, 1.0f));
  EXPECT_EQ(CodeOf([&] { LoadChannel(dir / "a.f32", dir / "none.json"); }), ErrorCode::kMissingMetadata);

  WriteJson(dir / "zero.json", Sidecar(0.0));
  EXPECT_EQ(CodeOf([&] { LoadChannel(dir / "a.f32", dir / "zero.json"); }), ErrorCode::kMissingMetadata);

  auto partial = Sidecar();
  partial.erase("shot_id");
  WriteJson(dir / "partial.json", partial);
  EXPECT_EQ(CodeOf([&] { LoadChannel(dir / "a.f32", dir / "partial.json"); }), ErrorCode::kMissingMetadata);

  auto enc = Sidecar();
  enc["encoding"] = "int16be";
  WriteJson(dir / "enc.json", enc);
  EXPECT_EQ(CodeOf([&] { LoadChannel(dir / "a.f32", dir / "enc.json"); }), ErrorCode::kUnsupportedEncoding);

  auto count = Sidecar();
  count["n_samples"] = 65;
  WriteJson(dir / "count.json", count);
  EXPECT_EQ(CodeOf([&] { LoadChannel(dir / "a.f32", dir / "count.json"); }), ErrorCode::kCorruptSamples);
}

TEST(LoadChannel, ReportsIndexOfFirstNonFiniteSample) {
  TempDir dir("ingest");
  std::vector<float> v(32, 0.5f);
  v[7] = std::numeric_limits<float>::quiet_NaN();
  WriteFloats(dir / "a.f32", v);
  WriteJson(dir / "a.json", Sidecar());

  std::size_t expected = v.size();
  std::ifstream in(dir / "a.f32", std::ios::binary);
  float x;
  for (std::size_t i = 0; in.read(reinterpret_cast<char*>(&x), sizeof x); ++i) {
    if (!std::isfinite(x)) {
      expected = i;
      break;
    }
  }
  try {
    LoadChannel(dir / "a.f32", dir / "a.json");
    FAIL() << "expected CorruptSamples";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptSamples);
    EXPECT_NE(std::string(e.what()).find("index " + std::to_string(expected)), std::string::npos) << e.what();
  }
}

TEST(LoadChannel, RoundTripKeepsUnknownKeys) {
  TempDir dir("ingest");
  ChannelSeries s = Series({1.0, -2.5, 3.25, 0.0}, 1e6, "co2_1");
  s.t0_ms = -12.5;
  s.extra["units"] = "V";
  s.extra["gain"] = 3;
  SaveChannel(s, dir / "c.f32", dir / "c.json");
  const ChannelSeries r = LoadChannel(dir / "c.f32", dir / "c.json");
  EXPECT_EQ(r.samples, s.samples);
  EXPECT_EQ(r.sample_rate_hz, 1e6);
  EXPECT_EQ(r.t0_ms, -12.5);
  EXPECT_EQ(r.extra.at("units"), "V");
  EXPECT_EQ(r.extra.at("gain"), 3);
}

TEST(Manifest, RelativePathsResolveAgainstManifest) {
  TempDir dir("manifest");
  std::filesystem::create_directories(dir / "shot");
  ShotManifest m;
  m.shot_id = "170008";
  m.channels.push_back({dir / "shot" / "a.f32", dir / "shot" / "a.json"});
  m.channels.push_back({dir / "shot" / "b.f32", dir / "shot" / "b.json"});
  SaveManifest(m, dir / "shot" / "manifest.json");
  const ShotManifest r = LoadManifest(dir / "shot" / "manifest.json");
  EXPECT_EQ(r.shot_id, "170008");
  ASSERT_EQ(r.channels.size(), 2u);
  EXPECT_TRUE(std::filesystem::equivalent(r.channels[1].data.parent_path(), dir / "shot"));
  EXPECT_EQ(r.channels[1].data.filename(), "b.f32");
}

TEST(ValidateSeries, RejectsBadSeries) {
  EXPECT_EQ(CodeOf([] { ValidateSeries(Series({}, 1.0)); }), ErrorCode::kCorruptSamples);
  EXPECT_EQ(CodeOf([] { ValidateSeries(Series({1.0}, -1.0)); }), ErrorCode::kMissingMetadata);
  EXPECT_EQ(CodeOf([] { ValidateSeries(Series({1.0, INFINITY}, 1.0)); }), ErrorCode::kCorruptSamples);
  EXPECT_EQ(CodeOf([] { RequireStftLength(Series(std::vector<double>(2047), 1.0), 1024); }),
            ErrorCode::kSeriesTooShort);
  EXPECT_NO_THROW(RequireStftLength(Series(std::vector<double>(2048), 1.0), 1024));
}

TEST(DecimationPlan, IntegerFactorsOnly) {
  const DecimationPlan p = DecimationPlan::Make(1e6, 500000.0);
  EXPECT_EQ(p.factor, 2u);
  EXPECT_EQ(p.filter_order, 8);
  EXPECT_DOUBLE_EQ(p.normalized_cutoff(), 0.4);
  EXPECT_EQ(p.edge_pad(), 24u);
  EXPECT_EQ(DecimationPlan::Make(2e6, 500000.0).factor, 4u);
  EXPECT_EQ(CodeOf([] { DecimationPlan::Make(750000.0, 500000.0); }), ErrorCode::kNonIntegerFactor);
  EXPECT_EQ(CodeOf([] { DecimationPlan::Make(250000.0, 500000.0); }), ErrorCode::kNonIntegerFactor);
}

TEST(Decimate, FactorOneIsBitExact) {
  const ChannelSeries s = Series(Sine(5000, 500000.0, 1234.5), 500000.0);
  const ChannelSeries d = Decimate(s, 500000.0);
  EXPECT_EQ(d.samples, s.samples);
  EXPECT_EQ(d.sample_rate_hz, s.sample_rate_hz);
}

TEST(Decimate, TooShortForEdgePadding) {
  EXPECT_EQ(CodeOf([] { Decimate(Series(std::vector<double>(23, 1.0), 1e6), 500000.0); }),
            ErrorCode::kSeriesTooShort);
}

TEST(Decimate, PassbandToneKeepsAmplitudeAndPhase) {
  const double fs = 1e6;
  const std::size_t n = 200000;
  const std::vector<double> x = Sine(n, fs, 10000.0, 1.0, 0.3);
  const ChannelSeries d = Decimate(Series(x, fs), 500000.0);
  ASSERT_EQ(d.samples.size(), n / 2);
  EXPECT_EQ(d.sample_rate_hz, 500000.0);

  // Amplitude from the RMS of the interior.
  double ss = 0.0;
  const std::size_t lo = 2000, hi = d.samples.size() - 2000;
  for (std::size_t i = lo; i < hi; ++i) ss += d.samples[i] * d.samples[i];
  const double amp = std::sqrt(2.0 * ss / static_cast<double>(hi - lo));
  EXPECT_NEAR(amp, 1.0, 0.01);

  // Peak of the cross-correlation against the ideally subsampled input.
  int best = 99;
  double best_c = -INFINITY;
  for (int lag = -5; lag <= 5; ++lag) {
    double c = 0.0;
    for (std::size_t i = lo; i < hi; ++i) c += d.samples[i] * x[static_cast<std::size_t>(2 * static_cast<long>(i) + 2 * lag)];
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  EXPECT_EQ(best, 0);
}

TEST(Decimate, BandLimitedInputHasZeroLag) {
  const double fs = 1e6;
  const std::size_t n = 100000;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> freq(1000.0, 100000.0), ph(0.0, 6.28);
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < 12; ++k) {
    const auto s = Sine(n, fs, freq(rng), 1.0, ph(rng));
    for (std::size_t i = 0; i < n; ++i) x[i] += s[i];
  }
  const ChannelSeries d = Decimate(Series(x, fs), 500000.0);
  int best = 99;
  double best_c = -INFINITY;
  for (int lag = -8; lag <= 8; ++lag) {
    double c = 0.0;
    for (std::size_t i = 1000; i < d.samples.size() - 1000; ++i) {
      c += d.samples[i] * x[static_cast<std::size_t>(2 * static_cast<long>(i) + 2 * lag)];
    }
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  EXPECT_EQ(best, 0);
}

TEST(Decimate, StopbandToneAttenuatedBy40dB) {
  const double fs = 1e6;
  const std::size_t n = 200000;
  const ChannelSeries d = Decimate(Series(Sine(n, fs, 300000.0), fs), 500000.0);
  double ss = 0.0;
  const std::size_t lo = 2000, hi = d.samples.size() - 2000;
  for (std::size_t i = lo; i < hi; ++i) ss += d.samples[i] * d.samples[i];
  const double rms = std::sqrt(ss / static_cast<double>(hi - lo));
  EXPECT_LE(20.0 * std::log10(rms / std::sqrt(0.5)), -40.0);
}

TEST(Decimate, CarriesMetadata) {
  ChannelSeries s = Series(Sine(4000, 2e6, 1000.0), 2e6, "ece");
  s.t0_ms = 100.0;
  s.extra["units"] = "keV";
  const ChannelSeries d = Decimate(s, 500000.0);
  EXPECT_EQ(d.samples.size(), 1000u);
  EXPECT_EQ(d.t0_ms, 100.0);
  EXPECT_EQ(d.channel_id, "ece");
  EXPECT_EQ(d.extra.at("units"), "keV");
}

}  // namespace
}  // namespace modex
