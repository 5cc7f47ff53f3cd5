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

#ifndef MODEX_SPECTROGRAM_HPP_
#define MODEX_SPECTROGRAM_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modex {

enum class SpectrogramKind : std::uint32_t {
  kComplex = 0,
  kPower = 1,
  kLogPower = 2,
  kWhitened = 3,
  kMask = 4,
};

std::string_view ToString(SpectrogramKind kind);

struct SpectrogramAxes {
  std::vector<double> freq_hz;  // bin centers, one per row
  std::vector<double> time_ms;  // frame centers, one per column
  std::size_t window_len = 0;
  std::size_t hop = 0;
  double sample_rate_hz = 0.0;

  std::size_t bins() const { return freq_hz.size(); }
  std::size_t frames() const { return time_ms.size(); }
  bool SameGrid(const SpectrogramAxes& other) const;
};

// A frequency x time matrix. Storage is frame-major: the bins of one frame
// are contiguous, so element (f, t) lives at t * bins() + f. Bins below
// guard_bins() are carried but excluded from detection downstream.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(SpectrogramKind kind, SpectrogramAxes axes);

  SpectrogramKind kind() const { return kind_; }
  bool is_complex() const { return kind_ == SpectrogramKind::kComplex; }
  std::size_t bins() const { return axes_.bins(); }
  std::size_t frames() const { return axes_.frames(); }
  std::size_t size() const { return bins() * frames(); }
  const SpectrogramAxes& axes() const { return axes_; }

  std::size_t guard_bins() const { return guard_bins_; }
  void set_guard_bins(std::size_t n) { guard_bins_ = n; }

  // Real kinds.
  std::span<double> values() { return real_; }
  std::span<const double> values() const { return real_; }
  std::span<double> frame(std::size_t t) { return {real_.data() + t * bins(), bins()}; }
  std::span<const double> frame(std::size_t t) const {
    return {real_.data() + t * bins(), bins()};
  }
  double& at(std::size_t f, std::size_t t) { return real_[t * bins() + f]; }
  double at(std::size_t f, std::size_t t) const { return real_[t * bins() + f]; }

  // Complex kind.
  std::span<std::complex<double>> cvalues() { return complex_; }
  std::span<const std::complex<double>> cvalues() const { return complex_; }
  std::span<std::complex<double>> cframe(std::size_t t) {
    return {complex_.data() + t * bins(), bins()};
  }
  std::span<const std::complex<double>> cframe(std::size_t t) const {
    return {complex_.data() + t * bins(), bins()};
  }
  std::complex<double>& cat(std::size_t f, std::size_t t) { return complex_[t * bins() + f]; }
  const std::complex<double>& cat(std::size_t f, std::size_t t) const {
    return complex_[t * bins() + f];
  }

  // Same axes and guard band, new kind, zero-filled.
  Spectrogram Like(SpectrogramKind kind) const;

  // Throws KindMismatch unless kind() is one of `allowed`.
  void ExpectKind(std::initializer_list<SpectrogramKind> allowed, std::string_view op) const;

 private:
  SpectrogramKind kind_ = SpectrogramKind::kPower;
  SpectrogramAxes axes_;
  std::size_t guard_bins_ = 0;
  std::vector<double> real_;
  std::vector<std::complex<double>> complex_;
};

// Throws DimMismatch unless both spectrograms share bins, frames and axes.
void ExpectSameGrid(const Spectrogram& a, const Spectrogram& b, std::string_view op);

// Self-describing binary container. Layout (little-endian):
//   magic "MODEXSPC", u32 version, u32 kind, u64 rows, u64 cols,
//   u64 window_len, u64 hop, f64 sample_rate_hz, u64 guard_bins,
//   f64[rows] freq axis, f64[cols] time axis, u32 plane count, then per
//   plane: u32 name length, name, u32 type, u64 element count, payload.
// Plane "values" holds the spectrogram itself, row-major (bins x frames)
// float32, or interleaved float32 (re, im) pairs when complex. Extra
// planes carry model data (baseline, coherence) or f64 vectors.
struct ContainerPlane {
  enum class Type : std::uint32_t { kRealF32 = 0, kComplexF32 = 1, kVectorF64 = 2 };
  Type type = Type::kRealF32;
  std::vector<double> real;                  // kRealF32 / kVectorF64
  std::vector<std::complex<double>> complex;  // kComplexF32
};

struct Container {
  SpectrogramKind kind = SpectrogramKind::kPower;
  SpectrogramAxes axes;
  std::size_t guard_bins = 0;
  // Ordered by name so files are byte-stable.
  std::map<std::string, ContainerPlane> planes;
};

Container ToContainer(const Spectrogram& spec);
Spectrogram FromContainer(const Container& c);

// Row-major (bins x frames) plane from a frame-major buffer.
ContainerPlane MatrixPlane(std::span<const double> frame_major, std::size_t bins,
                           std::size_t frames);
// Frame-major buffer from a row-major real plane.
std::vector<double> FrameMajor(const ContainerPlane& plane, std::size_t bins,
                               std::size_t frames);
ContainerPlane VectorPlane(std::vector<double> v);

void WriteContainer(const Container& c, const std::filesystem::path& path);
Container ReadContainer(const std::filesystem::path& path);

inline void WriteSpectrogram(const Spectrogram& s, const std::filesystem::path& path) {
  WriteContainer(ToContainer(s), path);
}
inline Spectrogram ReadSpectrogram(const std::filesystem::path& path) {
  return FromContainer(ReadContainer(path));
}

}  // namespace modex

#endif  // MODEX_SPECTROGRAM_HPP_
