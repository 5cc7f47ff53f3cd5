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

#include "modex/spectrogram.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "modex/error.hpp"

namespace modex {
namespace {

constexpr char kMagic[8] = {'M', 'O', 'D', 'E', 'X', 'S', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little);

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  template <typename T>
  void Put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void Bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void Finish() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIoError, "write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  template <typename T>
  T Get() {
    T v;
    Bytes(&v, sizeof(T));
    return v;
  }
  void Bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw Error(ErrorCode::kIoError, path_.string() + " is truncated");
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

bool ValidKind(std::uint32_t k) { return k <= static_cast<std::uint32_t>(SpectrogramKind::kMask); }

}  // namespace

std::string_view ToString(SpectrogramKind kind) {
  switch (kind) {
    case SpectrogramKind::kComplex: return "complex";
    case SpectrogramKind::kPower: return "power";
    case SpectrogramKind::kLogPower: return "log_power";
    case SpectrogramKind::kWhitened: return "whitened";
    case SpectrogramKind::kMask: return "mask";
  }
  return "unknown";
}

bool SpectrogramAxes::SameGrid(const SpectrogramAxes& other) const {
  return freq_hz == other.freq_hz && time_ms == other.time_ms;
}

Spectrogram::Spectrogram(SpectrogramKind kind, SpectrogramAxes axes)
    : kind_(kind), axes_(std::move(axes)) {
  if (is_complex()) {
    complex_.assign(size(), {0.0, 0.0});
  } else {
    real_.assign(size(), 0.0);
  }
}

Spectrogram Spectrogram::Like(SpectrogramKind kind) const {
  Spectrogram s(kind, axes_);
  s.guard_bins_ = guard_bins_;
  return s;
}

void Spectrogram::ExpectKind(std::initializer_list<SpectrogramKind> allowed,
                             std::string_view op) const {
  for (SpectrogramKind k : allowed) {
    if (k == kind_) return;
  }
  throw Error(ErrorCode::kKindMismatch,
              std::string(op) + " does not accept a " + std::string(ToString(kind_)) + " spectrogram");
}

void ExpectSameGrid(const Spectrogram& a, const Spectrogram& b, std::string_view op) {
  if (a.bins() != b.bins() || a.frames() != b.frames() || !a.axes().SameGrid(b.axes())) {
    throw Error(ErrorCode::kDimMismatch,
                std::string(op) + ": spectrogram grids differ (" + std::to_string(a.bins()) + "x" +
                    std::to_string(a.frames()) + " vs " + std::to_string(b.bins()) + "x" +
                    std::to_string(b.frames()) + ")");
  }
}

ContainerPlane MatrixPlane(std::span<const double> frame_major, std::size_t bins,
                           std::size_t frames) {
  ContainerPlane p;
  p.type = ContainerPlane::Type::kRealF32;
  p.real.resize(bins * frames);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) p.real[f * frames + t] = frame_major[t * bins + f];
  }
  return p;
}

std::vector<double> FrameMajor(const ContainerPlane& plane, std::size_t bins, std::size_t frames) {
  if (plane.real.size() != bins * frames) {
    throw Error(ErrorCode::kDimMismatch, "container plane has the wrong element count");
  }
  std::vector<double> out(bins * frames);
  for (std::size_t f = 0; f < bins; ++f) {
    for (std::size_t t = 0; t < frames; ++t) out[t * bins + f] = plane.real[f * frames + t];
  }
  return out;
}

ContainerPlane VectorPlane(std::vector<double> v) {
  ContainerPlane p;
  p.type = ContainerPlane::Type::kVectorF64;
  p.real = std::move(v);
  return p;
}

Container ToContainer(const Spectrogram& spec) {
  Container c;
  c.kind = spec.kind();
  c.axes = spec.axes();
  c.guard_bins = spec.guard_bins();
  const std::size_t bins = spec.bins(), frames = spec.frames();
  if (spec.is_complex()) {
    ContainerPlane p;
    p.type = ContainerPlane::Type::kComplexF32;
    p.complex.resize(spec.size());
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < bins; ++f) p.complex[f * frames + t] = spec.cat(f, t);
    }
    c.planes["values"] = std::move(p);
  } else {
    c.planes["values"] = MatrixPlane(spec.values(), bins, frames);
  }
  return c;
}

Spectrogram FromContainer(const Container& c) {
  auto it = c.planes.find("values");
  if (it == c.planes.end()) throw Error(ErrorCode::kIoError, "container has no 'values' plane");
  Spectrogram s(c.kind, c.axes);
  s.set_guard_bins(c.guard_bins);
  const std::size_t bins = s.bins(), frames = s.frames();
  if (s.is_complex()) {
    if (it->second.type != ContainerPlane::Type::kComplexF32 ||
        it->second.complex.size() != s.size()) {
      throw Error(ErrorCode::kIoError, "complex container plane is malformed");
    }
    for (std::size_t f = 0; f < bins; ++f) {
      for (std::size_t t = 0; t < frames; ++t) s.cat(f, t) = it->second.complex[f * frames + t];
    }
  } else {
    const std::vector<double> fm = FrameMajor(it->second, bins, frames);
    std::copy(fm.begin(), fm.end(), s.values().begin());
  }
  return s;
}

void WriteContainer(const Container& c, const std::filesystem::path& path) {
  Writer w(path);
  w.Bytes(kMagic, sizeof(kMagic));
  w.Put<std::uint32_t>(kVersion);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.kind));
  w.Put<std::uint64_t>(c.axes.bins());
  w.Put<std::uint64_t>(c.axes.frames());
  w.Put<std::uint64_t>(c.axes.window_len);
  w.Put<std::uint64_t>(c.axes.hop);
  w.Put<double>(c.axes.sample_rate_hz);
  w.Put<std::uint64_t>(c.guard_bins);
  w.Bytes(c.axes.freq_hz.data(), c.axes.freq_hz.size() * sizeof(double));
  w.Bytes(c.axes.time_ms.data(), c.axes.time_ms.size() * sizeof(double));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.planes.size()));
  for (const auto& [name, plane] : c.planes) {
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.Bytes(name.data(), name.size());
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(plane.type));
    switch (plane.type) {
      case ContainerPlane::Type::kRealF32: {
        w.Put<std::uint64_t>(plane.real.size());
        std::vector<float> buf(plane.real.begin(), plane.real.end());
        w.Bytes(buf.data(), buf.size() * sizeof(float));
        break;
      }
      case ContainerPlane::Type::kComplexF32: {
        w.Put<std::uint64_t>(plane.complex.size());
        std::vector<float> buf;
        buf.reserve(2 * plane.complex.size());
        for (const auto& z : plane.complex) {
          buf.push_back(static_cast<float>(z.real()));
          buf.push_back(static_cast<float>(z.imag()));
        }
        w.Bytes(buf.data(), buf.size() * sizeof(float));
        break;
      }
      case ContainerPlane::Type::kVectorF64:
        w.Put<std::uint64_t>(plane.real.size());
        w.Bytes(plane.real.data(), plane.real.size() * sizeof(double));
        break;
    }
  }
  w.Finish();
}

Container ReadContainer(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kIoError, path.string() + " is not a spectrogram container");
  }
  if (r.Get<std::uint32_t>() != kVersion) {
    throw Error(ErrorCode::kIoError, path.string() + " has an unsupported container version");
  }
  Container c;
  const auto kind = r.Get<std::uint32_t>();
  if (!ValidKind(kind)) throw Error(ErrorCode::kIoError, "unknown spectrogram kind in container");
  c.kind = static_cast<SpectrogramKind>(kind);
  const auto rows = r.Get<std::uint64_t>();
  const auto cols = r.Get<std::uint64_t>();
  c.axes.window_len = r.Get<std::uint64_t>();
  c.axes.hop = r.Get<std::uint64_t>();
  c.axes.sample_rate_hz = r.Get<double>();
  c.guard_bins = r.Get<std::uint64_t>();
  c.axes.freq_hz.resize(rows);
  c.axes.time_ms.resize(cols);
  r.Bytes(c.axes.freq_hz.data(), rows * sizeof(double));
  r.Bytes(c.axes.time_ms.data(), cols * sizeof(double));
  const auto planes = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < planes; ++i) {
    std::string name(r.Get<std::uint32_t>(), '\0');
    r.Bytes(name.data(), name.size());
    ContainerPlane p;
    const auto type = r.Get<std::uint32_t>();
    const auto count = r.Get<std::uint64_t>();
    switch (type) {
      case 0: {
        p.type = ContainerPlane::Type::kRealF32;
        std::vector<float> buf(count);
        r.Bytes(buf.data(), count * sizeof(float));
        p.real.assign(buf.begin(), buf.end());
        break;
      }
      case 1: {
        p.type = ContainerPlane::Type::kComplexF32;
        std::vector<float> buf(2 * count);
        r.Bytes(buf.data(), buf.size() * sizeof(float));
        p.complex.resize(count);
        for (std::size_t k = 0; k < count; ++k) p.complex[k] = {buf[2 * k], buf[2 * k + 1]};
        break;
      }
      case 2:
        p.type = ContainerPlane::Type::kVectorF64;
        p.real.resize(count);
        r.Bytes(p.real.data(), count * sizeof(double));
        break;
      default:
        throw Error(ErrorCode::kIoError, "unknown plane type in container");
    }
    c.planes.emplace(std::move(name), std::move(p));
  }
  return c;
}

}  // namespace modex
