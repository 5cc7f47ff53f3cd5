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

#include "modex/denoise.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "modex/error.hpp"
#include "modex/tfa.hpp"
#include "test_util.hpp"

namespace modex {
namespace {

using testing::GridAxes;

Spectrogram ComplexNoise(std::size_t bins, std::size_t frames, std::uint64_t seed, double power = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, std::sqrt(power / 2.0));
  Spectrogram s(SpectrogramKind::kComplex, GridAxes(bins, frames));
  for (auto& z : s.cvalues()) z = {d(rng), d(rng)};
  return s;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Shared tone plus independent white noise per channel, in the time domain.
std::vector<Spectrogram> ToneStack(std::size_t channels, double tone_rms, std::size_t frames, std::uint64_t seed) {
  const std::size_t n = (frames - 1) * 128 + 1024;
  const auto tone = testing::Sine(n, 500000.0, 50000.0, tone_rms * std::numbers::sqrt2, 0.3);
  std::vector<Spectrogram> out;
  for (std::size_t c = 0; c < channels; ++c) {
    std::mt19937_64 rng(seed + c);
    std::normal_distribution<double> d(0.0, 1.0);
    auto x = tone;
    for (double& v : x) v += d(rng);
    out.push_back(Stft(testing::Series(x, 500000.0), StftConfig{}));
  }
  return out;
}

TEST(CrossPower, IdenticalChannels) {
  const Spectrogram a = ComplexNoise(33, 64, 1);
  const CpsEstimate est = CrossPower(a, a, 16);
  ASSERT_EQ(est.blocks, 4u);
  for (std::size_t b = 0; b < est.blocks; ++b) {
    for (std::size_t f = 0; f < est.bins; ++f) {
      double auto_power = 0.0;
      for (std::size_t m = 0; m < 16; ++m) auto_power += std::norm(a.cat(f, b * 16 + m)) / 16.0;
      EXPECT_NEAR(est.cross_at(f, b).real(), auto_power, 1e-12);
      EXPECT_NEAR(est.cross_at(f, b).imag(), 0.0, 1e-12);
      EXPECT_NEAR(est.coherence_at(f, b), 1.0, 1e-12);
    }
  }
}

TEST(CrossPower, HermitianUnderSwap) {
  const Spectrogram a = ComplexNoise(65, 100, 2), b = ComplexNoise(65, 100, 3);
  const CpsEstimate ab = CrossPower(a, b, 8), ba = CrossPower(b, a, 8);
  for (std::size_t i = 0; i < ab.cross_power.size(); ++i) {
    EXPECT_EQ(ab.cross_power[i], std::conj(ba.cross_power[i]));
    EXPECT_EQ(ab.coherence[i], ba.coherence[i]);
  }
}

TEST(CrossPower, CoherenceBounded) {
  const Spectrogram a = ComplexNoise(65, 100, 4);
  Spectrogram b = ComplexNoise(65, 100, 5);
  for (std::size_t i = 0; i < b.size(); i += 3) b.cvalues()[i] = 2.0 * a.cvalues()[i];
  for (std::size_t m : {1u, 2u, 7u, 50u}) {
    for (double c : CrossPower(a, b, m).coherence) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
  for (double c : CrossPower(a, b, 1).coherence) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(CrossPower, ProportionalChannelsAreFullyCoherent) {
  const Spectrogram a = ComplexNoise(17, 32, 6);
  Spectrogram b = a;
  for (auto& z : b.cvalues()) z *= std::complex<double>(0.5, -1.5);
  for (double c : CrossPower(a, b, 32).coherence) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(CrossPower, IndependentNoiseMeanMagnitude) {
  const Spectrogram a = ComplexNoise(513, 64 * 20, 7), b = ComplexNoise(513, 64 * 20, 8);
  const CpsEstimate est = CrossPower(a, b, 64);
  double sum = 0.0;
  for (auto z : est.cross_power) sum += std::abs(z);
  const double mean = sum / static_cast<double>(est.cross_power.size());
  EXPECT_GE(est.cross_power.size(), 10000u);
  EXPECT_NEAR(mean, std::sqrt(std::numbers::pi) / 2.0 / 8.0, 0.1 * 0.1108);
}

TEST(CrossPower, NoiseFloorFallsAsInverseSqrtBlock) {
  const Spectrogram a = ComplexNoise(257, 256 * 16, 9), b = ComplexNoise(257, 256 * 16, 10);
  std::vector<double> lm, lmed;
  for (std::size_t m : {4u, 16u, 64u, 256u}) {
    std::vector<double> mag;
    for (auto z : CrossPower(a, b, m).cross_power) mag.push_back(std::abs(z));
    lm.push_back(std::log(static_cast<double>(m)));
    lmed.push_back(std::log(Median(mag)));
  }
  EXPECT_NEAR(testing::Slope(lm, lmed), -0.5, 0.1);
}

TEST(CrossPower, SharedToneIsCoherent) {
  const auto stack = ToneStack(2, 1.0, 64 * 8, 20);
  const CpsEstimate est = CrossPower(stack[0], stack[1], 64);
  std::vector<double> off;
  for (std::size_t b = 0; b < est.blocks; ++b) {
    EXPECT_GE(est.coherence_at(102, b), 0.9);
    for (std::size_t f = 1; f < est.bins; ++f) {
      if (f < 98 || f > 106) off.push_back(est.coherence_at(f, b));
    }
  }
  EXPECT_LE(Median(off), 0.05);
}

TEST(CrossPower, SingleSegmentTransientIsAveragedDown) {
  Spectrogram a = ComplexNoise(65, 64, 11, 1e-4), b = ComplexNoise(65, 64, 12, 1e-4);
  const std::size_t frame = 16 + 5;
  for (std::size_t f = 0; f < 65; ++f) {
    a.cat(f, frame) += std::polar(10.0, 0.1 * static_cast<double>(f));
    b.cat(f, frame) += std::polar(10.0, 0.1 * static_cast<double>(f));
  }
  const CpsEstimate one = CrossPower(a, b, 1), block = CrossPower(a, b, 16);
  for (std::size_t f = 0; f < 65; ++f) {
    const double single = std::abs(one.cross_at(f, frame));
    EXPECT_NEAR(std::abs(block.cross_at(f, 1)) / (single / 16.0), 1.0, 0.1);
  }
}

TEST(CrossPower, Errors) {
  const Spectrogram a = ComplexNoise(9, 10, 1), b = ComplexNoise(9, 11, 2);
  EXPECT_THROW(CrossPower(a, b, 2), Error);
  try {
    CrossPower(a, a, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBlockTooLarge);
  }
  Spectrogram lp(SpectrogramKind::kLogPower, GridAxes(9, 10));
  EXPECT_THROW(CrossPower(lp, lp, 2), Error);
}

TEST(CrossPower, ExcludedFramesAreIgnored) {
  Spectrogram a = ComplexNoise(9, 32, 13), b = ComplexNoise(9, 32, 14);
  std::vector<std::uint8_t> exclude(32, 0);
  exclude[3] = 1;
  for (std::size_t t = 16; t < 32; ++t) exclude[t] = 1;
  const CpsEstimate base = CrossPower(a, b, 16, 1, exclude);
  for (std::size_t f = 0; f < 9; ++f) {
    a.cat(f, 3) = 1e6;
    b.cat(f, 3) = 1e6;
  }
  const CpsEstimate est = CrossPower(a, b, 16, 1, exclude);
  for (std::size_t f = 0; f < 9; ++f) {
    std::complex<double> s = 0.0;
    for (std::size_t t = 0; t < 16; ++t) {
      if (t != 3) s += a.cat(f, t) * std::conj(b.cat(f, t));
    }
    EXPECT_NEAR(std::abs(est.cross_at(f, 0) - s / 15.0), 0.0, 1e-12);
    EXPECT_EQ(est.cross_at(f, 0), base.cross_at(f, 0));
    EXPECT_EQ(est.cross_at(f, 1), std::complex<double>(0.0, 0.0));
    EXPECT_EQ(est.coherence_at(f, 1), 0.0);
  }
  EXPECT_THROW(CrossPower(a, b, 16, 1, std::vector<std::uint8_t>(31, 0)), Error);
}

TEST(CpsDenoise, IdenticalChannelsPassThrough) {
  const Spectrogram a = ComplexNoise(33, 48, 15);
  const std::vector<Spectrogram> stack = {a, a};
  const Spectrogram out = CpsDenoise(stack, 0, 16);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(out.cvalues()[i] - a.cvalues()[i]), 0.0, 1e-12);
}

TEST(CpsDenoise, NeverAmplifiesAndKeepsPhase) {
  std::vector<Spectrogram> stack = {ComplexNoise(33, 70, 16), ComplexNoise(33, 70, 17), ComplexNoise(33, 70, 18)};
  for (std::size_t i = 0; i < stack[0].size(); i += 2) {
    stack[1].cvalues()[i] += stack[0].cvalues()[i];
    stack[2].cvalues()[i] += stack[0].cvalues()[i];
  }
  const Spectrogram out = CpsDenoise(stack, 0, 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto in = stack[0].cvalues()[i], o = out.cvalues()[i];
    EXPECT_LE(std::abs(o), std::abs(in) * (1.0 + 1e-15));
    if (std::abs(o) > 0.0) {
      EXPECT_NEAR(std::arg(o), std::arg(in), 1e-12);
    }
  }
}

TEST(CpsDenoise, GainIsMedianPairwiseCoherence) {
  const std::vector<Spectrogram> stack = {ComplexNoise(9, 70, 19), ComplexNoise(9, 70, 20), ComplexNoise(9, 70, 21),
                                          ComplexNoise(9, 70, 22)};
  const Spectrogram out = CpsDenoise(stack, 1, 16);
  std::vector<CpsEstimate> pairs;
  for (std::size_t j : {0u, 2u, 3u}) pairs.push_back(CrossPower(stack[1], stack[j], 16));
  for (std::size_t t = 0; t < 70; ++t) {
    const std::size_t b = std::min<std::size_t>(t / 16, 3);
    for (std::size_t f = 0; f < 9; ++f) {
      const double g = Median({pairs[0].coherence_at(f, b), pairs[1].coherence_at(f, b), pairs[2].coherence_at(f, b)});
      EXPECT_NEAR(std::abs(out.cat(f, t) - g * stack[1].cat(f, t)), 0.0, 1e-12) << f << " " << t;
    }
  }
}

TEST(CpsDenoise, ImprovesToneSnr) {
  const auto stack = ToneStack(4, 0.1, 64 * 8, 30);
  const Spectrogram out = CpsDenoise(stack, 0, 64);
  auto snr = [](const Spectrogram& z) {
    double tone = 0.0;
    std::vector<double> bg;
    for (std::size_t t = 0; t < z.frames(); ++t) {
      tone += std::norm(z.cat(102, t)) / static_cast<double>(z.frames());
      for (std::size_t f = 1; f < z.bins(); ++f) {
        if (f < 98 || f > 106) bg.push_back(std::norm(z.cat(f, t)));
      }
    }
    return 10.0 * std::log10(tone / Median(bg));
  };
  EXPECT_GE(snr(out) - snr(stack[0]), 10.0);
}

TEST(CpsDenoise, Errors) {
  const std::vector<Spectrogram> one = {ComplexNoise(9, 20, 1)};
  try {
    CpsDenoise(one, 0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNeedTwoChannels);
  }
  const std::vector<Spectrogram> mixed = {ComplexNoise(9, 20, 1), ComplexNoise(9, 21, 2)};
  EXPECT_THROW(CpsDenoise(mixed, 0, 4), Error);
  const std::vector<Spectrogram> two = {ComplexNoise(9, 20, 1), ComplexNoise(9, 20, 2)};
  EXPECT_THROW(CpsDenoise(two, 2, 4), Error);
  EXPECT_THROW(CpsDenoise(two, 0, 21), Error);
}

TEST(Denoiser, Implementations) {
  const std::vector<Spectrogram> stack = {ComplexNoise(9, 32, 1), ComplexNoise(9, 32, 2)};
  const CpsDenoiser cps(16);
  const IdentityDenoiser none;
  const Denoiser& d = cps;
  EXPECT_EQ(d.name(), "cps");
  EXPECT_EQ(none.name(), "none");
  const Spectrogram a = d.Denoise(stack, 1), b = CpsDenoise(stack, 1, 16);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.cvalues()[i], b.cvalues()[i]);
  const Spectrogram c = none.Denoise(stack, 1);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c.cvalues()[i], stack[1].cvalues()[i]);
}

TEST(TotalVariation, Constant) {
  const Spectrogram s = testing::MakeReal(SpectrogramKind::kWhitened, 40, 40, [](auto, auto) { return 3.5; });
  EXPECT_EQ(TotalVariation(s), 0.0);
}

TEST(TotalVariation, FrequencyStep) {
  const std::size_t n = 64;
  const Spectrogram s = testing::MakeReal(SpectrogramKind::kLogPower, n, n, [](std::size_t f, auto) {
    return f >= 20 ? 1.0 : 0.0;
  });
  EXPECT_NEAR(TotalVariation(s), 1.0 / static_cast<double>(n), 1e-15);
}

TEST(TotalVariation, GaussianField) {
  // In the interior (dt, df) = (a - c, b - c) is normal with covariance
  // [[2, 1], [1, 2]], eigenvalues 3 and 1, so E|(dt, df)| = E[r] * mean over theta of
  // sqrt(3 cos^2 + sin^2) with r ~ Rayleigh(1). On the last row and column one
  // difference vanishes and the other is |N(0, 2)|.
  const std::size_t n = 256;
  std::mt19937_64 rng(40);
  std::normal_distribution<double> d(0.0, 1.0);
  const Spectrogram s = testing::MakeReal(SpectrogramKind::kWhitened, n, n, [&](auto, auto) { return d(rng); });
  double angular = 0.0;
  const int steps = 4096;
  for (int i = 0; i < steps; ++i) {
    const double th = 2.0 * std::numbers::pi * i / steps;
    angular += std::sqrt(3.0 * std::cos(th) * std::cos(th) + std::sin(th) * std::sin(th)) / steps;
  }
  const double interior = std::sqrt(std::numbers::pi / 2.0) * angular;
  const double edge = 2.0 / std::sqrt(std::numbers::pi);
  const double nn = static_cast<double>(n);
  const double expected = ((nn - 1) * (nn - 1) * interior + 2 * (nn - 1) * edge) / (nn * nn);
  EXPECT_NEAR(TotalVariation(s), expected, 0.01);
  RecordProperty("tv", std::to_string(TotalVariation(s)));
}

TEST(TotalVariation, RejectsComplex) {
  EXPECT_THROW(TotalVariation(ComplexNoise(4, 4, 1)), Error);
}

TEST(CpsEstimate, ContainerUsesBlockAxes) {
  const Spectrogram a = ComplexNoise(9, 50, 1), b = ComplexNoise(9, 50, 2);
  const CpsEstimate est = CrossPower(a, b, 16);
  const Container c = ToContainer(est, a.axes());
  EXPECT_EQ(c.axes.frames(), 3u);
  EXPECT_EQ(c.axes.hop, 16u * 128u);
  EXPECT_NEAR(c.axes.time_ms[0], 0.5 * (a.axes().time_ms[0] + a.axes().time_ms[15]), 1e-12);
  EXPECT_TRUE(c.planes.contains("coherence"));
}

}  // namespace
}  // namespace modex
