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

#include "modex/tfa.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "modex/error.hpp"
#include "test_util.hpp"

namespace modex {
namespace {

using testing::NaiveDft;
using testing::Series;
using testing::Sine;

std::vector<double> Noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

TEST(StftConfig, HopAndValidation) {
  StftConfig cfg;
  EXPECT_EQ(cfg.hop(), 128u);
  EXPECT_EQ(cfg.bins(), 513u);
  EXPECT_NO_THROW(cfg.Validate());
  cfg.overlap_fraction = 0.3;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.overlap_fraction = 1.0;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(HannWindow, Periodic) {
  const auto w = HannWindow(4);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
  EXPECT_NEAR(w[2], 1.0, 1e-15);
  EXPECT_NEAR(w[3], 0.5, 1e-15);
}

TEST(StftAxes, FramingArithmetic) {
  EXPECT_EQ(FrameCount(2000000, 1024, 128), 15618u);
  EXPECT_EQ(FrameCount(1023, 1024, 128), 0u);
  EXPECT_EQ(FrameCount(1024, 1024, 128), 1u);
  const SpectrogramAxes a = StftAxes(2000000, 500000.0, 10.0, StftConfig{});
  EXPECT_EQ(a.frames(), 15618u);
  EXPECT_EQ(a.bins(), 513u);
  for (std::size_t k = 0; k < a.bins(); ++k) EXPECT_EQ(a.freq_hz[k], static_cast<double>(k) * 500000.0 / 1024.0);
  EXPECT_EQ(a.freq_hz.back(), 250000.0);
  EXPECT_NEAR(a.time_ms[0], 10.0 + 1.024, 1e-12);
  for (std::size_t t = 1; t < a.frames(); ++t) EXPECT_NEAR(a.time_ms[t] - a.time_ms[t - 1], 0.256, 1e-9);
}

TEST(Stft, TooShort) {
  try {
    Stft(Series(std::vector<double>(1023, 0.0), 500000.0), StftConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSeriesTooShort);
  }
}

TEST(Stft, ZeroInputGivesZeroSpectrogram) {
  const Spectrogram z = Stft(Series(std::vector<double>(4096, 0.0), 500000.0), StftConfig{});
  EXPECT_EQ(z.kind(), SpectrogramKind::kComplex);
  for (auto v : z.cvalues()) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(Stft, MatchesDirectDft) {
  const auto x = Noise(8192, 11);
  const StftConfig cfg;
  const Spectrogram z = Stft(Series(x, 500000.0), cfg);
  const auto w = HannWindow(cfg.window_len);
  for (std::size_t t : {0u, 7u, 56u}) {
    std::vector<double> seg(cfg.window_len);
    for (std::size_t n = 0; n < seg.size(); ++n) seg[n] = w[n] * x[t * cfg.hop() + n];
    const auto ref = NaiveDft(seg);
    double scale = 0.0;
    for (auto v : ref) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(std::abs(z.cat(k, t) - ref[k]), 0.0, 1e-9 * scale);
  }
}

TEST(Stft, ParsevalPerFrame) {
  const auto x = Noise(200000, 12, 3.0);
  const StftConfig cfg;
  const Spectrogram z = Stft(Series(x, 500000.0), cfg);
  const auto w = HannWindow(cfg.window_len);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> pick(0, z.frames() - 1);
  const std::size_t n = cfg.window_len;
  for (int i = 0; i < 100; ++i) {
    const std::size_t t = pick(rng);
    double time_energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) time_energy += std::pow(w[k] * x[t * cfg.hop() + k], 2);
    double freq_energy = std::norm(z.cat(0, t)) + std::norm(z.cat(n / 2, t));
    for (std::size_t f = 1; f < n / 2; ++f) freq_energy += 2.0 * std::norm(z.cat(f, t));
    freq_energy /= static_cast<double>(n);
    EXPECT_NEAR(freq_energy / time_energy, 1.0, 1e-9);
  }
}

TEST(Stft, FiftyKilohertzToneAtBin102) {
  const Spectrogram z = Stft(Series(Sine(20000, 500000.0, 50000.0), 500000.0), StftConfig{});
  const Spectrogram p = Power(z);
  for (std::size_t t = 0; t < p.frames(); ++t) {
    auto col = p.frame(t);
    const auto peak = std::max_element(col.begin(), col.end()) - col.begin();
    EXPECT_EQ(peak, 102);
    double total = col.front() + col.back();
    for (std::size_t f = 1; f + 1 < col.size(); ++f) total += 2.0 * col[f];
    EXPECT_GE(2.0 * (col[102] + col[103]) / total, 0.95);
  }
}

TEST(Stft, Linear) {
  const auto x = Noise(6000, 21), y = Noise(6000, 22);
  std::vector<double> mix(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mix[i] = 2.5 * x[i] - 0.75 * y[i];
  const StftConfig cfg;
  const Spectrogram zx = Stft(Series(x, 1.0), cfg), zy = Stft(Series(y, 1.0), cfg), zm = Stft(Series(mix, 1.0), cfg);
  for (std::size_t i = 0; i < zm.size(); ++i) {
    const auto expect = 2.5 * zx.cvalues()[i] - 0.75 * zy.cvalues()[i];
    EXPECT_NEAR(std::abs(zm.cvalues()[i] - expect), 0.0, 1e-9 * (1.0 + std::abs(expect)));
  }
}

TEST(Stft, ThreadCountDoesNotChangeResult) {
  const auto x = Noise(50000, 31);
  const Spectrogram a = Stft(Series(x, 500000.0), StftConfig{}, 1);
  const Spectrogram b = Stft(Series(x, 500000.0), StftConfig{}, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.cvalues()[i], b.cvalues()[i]);
}

TEST(LogPower, Definition) {
  Spectrogram z(SpectrogramKind::kComplex, testing::GridAxes(3, 1));
  z.cat(0, 0) = {0.6, 0.8};
  z.cat(1, 0) = {0.0, 10.0};
  z.cat(2, 0) = {0.0, 0.0};
  const Spectrogram lp = LogPower(z);
  EXPECT_EQ(lp.kind(), SpectrogramKind::kLogPower);
  EXPECT_NEAR(lp.at(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(lp.at(1, 0), 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(lp.at(2, 0), -200.0);
  EXPECT_TRUE(lp.axes().SameGrid(z.axes()));
  EXPECT_THROW(LogPower(lp), Error);
}

TEST(Welch, SingleFrameIsItsPowerSpectrum) {
  const Spectrogram z = Stft(Series(Noise(1024, 41), 500000.0), StftConfig{});
  ASSERT_EQ(z.frames(), 1u);
  const auto w = Welch(z);
  for (std::size_t f = 0; f < w.size(); ++f) EXPECT_DOUBLE_EQ(w[f], std::norm(z.cat(f, 0)));
}

TEST(Welch, WhiteNoiseIsFlat) {
  // Non-overlapping frames so the M frames are independent.
  StftConfig cfg;
  cfg.overlap_fraction = 0.0;
  const std::size_t frames = 400;
  const double sigma = 2.0;
  const auto w = HannWindow(cfg.window_len);
  double sum_w2 = 0.0;
  for (double v : w) sum_w2 += v * v;
  const double level = sigma * sigma * sum_w2;
  std::size_t outside = 0, total = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto p = Welch(Stft(Series(Noise(frames * cfg.window_len, 100 + trial, sigma), 1.0), cfg));
    for (std::size_t f = 1; f + 1 < p.size(); ++f) {
      ++total;
      if (std::abs(p[f] - level) > 5.0 * level / std::sqrt(static_cast<double>(frames))) ++outside;
    }
  }
  EXPECT_EQ(outside, 0u) << "of " << total;
}

TEST(Welch, ToneMaximumAtBin102) {
  const auto p = Welch(Stft(Series(Sine(40000, 500000.0, 50000.0), 500000.0), StftConfig{}));
  EXPECT_EQ(std::max_element(p.begin(), p.end()) - p.begin(), 102);
}

}  // namespace
}  // namespace modex
