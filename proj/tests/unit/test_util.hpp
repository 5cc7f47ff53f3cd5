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

#ifndef MODEX_TESTS_TEST_UTIL_HPP_
#define MODEX_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "modex/ingest.hpp"
#include "modex/spectrogram.hpp"

namespace modex::testing {

// Grid of `bins` one-sided bins (window 2 * (bins - 1)) and `frames` frames.
inline SpectrogramAxes GridAxes(std::size_t bins, std::size_t frames, double fs = 500000.0,
                                std::size_t hop = 128) {
  SpectrogramAxes a;
  a.window_len = 2 * (bins - 1);
  a.hop = hop;
  a.sample_rate_hz = fs;
  for (std::size_t k = 0; k < bins; ++k) {
    a.freq_hz.push_back(static_cast<double>(k) * fs / static_cast<double>(a.window_len));
  }
  for (std::size_t t = 0; t < frames; ++t) {
    a.time_ms.push_back(1e3 * static_cast<double>(t * hop + a.window_len / 2) / fs);
  }
  return a;
}

template <typename F>
Spectrogram MakeReal(SpectrogramKind kind, std::size_t bins, std::size_t frames, F value) {
  Spectrogram s(kind, GridAxes(bins, frames));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) s.at(f, t) = value(f, t);
  }
  return s;
}

inline std::vector<double> Sine(std::size_t n, double fs, double f, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline ChannelSeries Series(std::vector<double> x, double fs, std::string id = "ch0") {
  ChannelSeries s;
  s.samples = std::move(x);
  s.sample_rate_hz = fs;
  s.channel_id = std::move(id);
  s.shot_id = "test";
  return s;
}

// Direct O(N^2) one-sided DFT.
inline std::vector<std::complex<double>> NaiveDft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

inline double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double StdDev(const std::vector<double>& v) {
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Least-squares slope of y on x.
inline double Slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = Mean(x), my = Mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("modex_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace modex::testing

#endif  // MODEX_TESTS_TEST_UTIL_HPP_
