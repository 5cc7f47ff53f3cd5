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

#include <algorithm>
#include <cmath>

#include "modex/error.hpp"
#include "modex/parallel.hpp"

namespace modex {
namespace {

void CheckStack(std::span<const Spectrogram> stack, std::size_t target, std::string_view op) {
  if (stack.size() < 2) throw Error(ErrorCode::kNeedTwoChannels, std::string(op) + " needs at least two channels");
  if (target >= stack.size()) throw Error(ErrorCode::kDimMismatch, std::string(op) + ": target index out of range");
  for (const auto& s : stack) {
    s.ExpectKind({SpectrogramKind::kComplex}, op);
    ExpectSameGrid(stack[target], s, op);
  }
}

void CheckBlock(std::size_t block, std::size_t frames) {
  if (block < 1) throw Error(ErrorCode::kInvalidConfig, "block must be >= 1");
  if (block > frames) {
    throw Error(ErrorCode::kBlockTooLarge,
                "block of " + std::to_string(block) + " frames exceeds " + std::to_string(frames) + " frames");
  }
}

}  // namespace

CpsEstimate CrossPower(const Spectrogram& a, const Spectrogram& b, std::size_t block, int threads,
                       std::span<const std::uint8_t> exclude) {
  a.ExpectKind({SpectrogramKind::kComplex}, "cross_power");
  b.ExpectKind({SpectrogramKind::kComplex}, "cross_power");
  ExpectSameGrid(a, b, "cross_power");
  CheckBlock(block, a.frames());
  if (!exclude.empty() && exclude.size() != a.frames()) {
    throw Error(ErrorCode::kDimMismatch, "cross_power: exclusion list does not match frame count");
  }

  CpsEstimate est;
  est.bins = a.bins();
  est.blocks = a.frames() / block;
  est.segments_per_block = block;
  est.cross_power.assign(est.bins * est.blocks, {0.0, 0.0});
  est.coherence.assign(est.bins * est.blocks, 0.0);
  ParallelChunks(est.blocks, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> pa(est.bins), pb(est.bins);
    for (std::size_t blk = begin; blk < end; ++blk) {
      std::complex<double>* s = est.cross_power.data() + blk * est.bins;
      std::fill(pa.begin(), pa.end(), 0.0);
      std::fill(pb.begin(), pb.end(), 0.0);
      std::size_t used = 0;
      for (std::size_t m = 0; m < block; ++m) {
        if (!exclude.empty() && exclude[blk * block + m]) continue;
        ++used;
        auto za = a.cframe(blk * block + m);
        auto zb = b.cframe(blk * block + m);
        for (std::size_t f = 0; f < est.bins; ++f) {
          s[f] += za[f] * std::conj(zb[f]);
          pa[f] += std::norm(za[f]);
          pb[f] += std::norm(zb[f]);
        }
      }
      double* c = est.coherence.data() + blk * est.bins;
      if (used == 0) continue;
      const double inv = 1.0 / static_cast<double>(used);
      for (std::size_t f = 0; f < est.bins; ++f) {
        s[f] *= inv;
        const double denom = pa[f] * inv * pb[f] * inv;
        c[f] = denom > 0.0 ? std::clamp(std::norm(s[f]) / denom, 0.0, 1.0) : 0.0;
      }
    }
  });
  return est;
}

SpectrogramAxes BlockAxes(const SpectrogramAxes& axes, std::size_t block) {
  CheckBlock(block, axes.frames());
  SpectrogramAxes out = axes;
  out.hop = axes.hop * block;
  out.time_ms.clear();
  for (std::size_t b = 0; b + 1 <= axes.frames() / block; ++b) {
    double sum = 0.0;
    for (std::size_t m = 0; m < block; ++m) sum += axes.time_ms[b * block + m];
    out.time_ms.push_back(sum / static_cast<double>(block));
  }
  return out;
}

Spectrogram CpsDenoise(std::span<const Spectrogram> stack, std::size_t target, std::size_t block,
                       int threads, std::span<const std::uint8_t> exclude) {
  CheckStack(stack, target, "cps_denoise");
  const Spectrogram& z = stack[target];
  CheckBlock(block, z.frames());

  std::vector<CpsEstimate> pairs;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    if (j != target) pairs.push_back(CrossPower(z, stack[j], block, threads, exclude));
  }
  const std::size_t bins = z.bins();
  const std::size_t blocks = pairs.front().blocks;
  std::vector<double> gain(bins * blocks);
  ParallelChunks(blocks, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> c(pairs.size());
    for (std::size_t b = begin; b < end; ++b) {
      for (std::size_t f = 0; f < bins; ++f) {
        for (std::size_t j = 0; j < pairs.size(); ++j) c[j] = pairs[j].coherence_at(f, b);
        std::sort(c.begin(), c.end());
        const std::size_t m = c.size() / 2;
        const double med = c.size() % 2 ? c[m] : 0.5 * (c[m - 1] + c[m]);
        gain[b * bins + f] = std::clamp(med, 0.0, 1.0);
      }
    }
  });

  Spectrogram out = z.Like(SpectrogramKind::kComplex);
  for (std::size_t t = 0; t < z.frames(); ++t) {
    const std::size_t b = std::min(t / block, blocks - 1);
    auto in = z.cframe(t);
    auto o = out.cframe(t);
    const double* g = gain.data() + b * bins;
    for (std::size_t f = 0; f < bins; ++f) o[f] = in[f] * g[f];
  }
  return out;
}

double TotalVariation(const Spectrogram& spec) {
  spec.ExpectKind({SpectrogramKind::kWhitened, SpectrogramKind::kLogPower}, "total_variation");
  const std::size_t bins = spec.bins();
  const std::size_t frames = spec.frames();
  if (bins == 0 || frames == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    auto col = spec.frame(t);
    auto next = spec.frame(std::min(t + 1, frames - 1));
    for (std::size_t f = 0; f < bins; ++f) {
      const double dt = next[f] - col[f];
      const double df = (f + 1 < bins ? col[f + 1] : col[f]) - col[f];
      sum += std::sqrt(dt * dt + df * df);
    }
  }
  return sum / static_cast<double>(bins * frames);
}

Spectrogram IdentityDenoiser::Denoise(std::span<const Spectrogram> stack, std::size_t target) const {
  if (target >= stack.size()) throw Error(ErrorCode::kDimMismatch, "identity denoiser: target index out of range");
  return stack[target];
}

Container ToContainer(const CpsEstimate& est, const SpectrogramAxes& spectrogram_axes) {
  Container c;
  c.kind = SpectrogramKind::kComplex;
  c.axes = BlockAxes(spectrogram_axes, est.segments_per_block);
  if (c.axes.bins() != est.bins || c.axes.frames() != est.blocks) {
    throw Error(ErrorCode::kDimMismatch, "cross-power estimate does not match axes");
  }
  ContainerPlane cross;
  cross.type = ContainerPlane::Type::kComplexF32;
  cross.complex.resize(est.cross_power.size());
  for (std::size_t f = 0; f < est.bins; ++f) {
    for (std::size_t b = 0; b < est.blocks; ++b) cross.complex[f * est.blocks + b] = est.cross_at(f, b);
  }
  c.planes["values"] = std::move(cross);
  c.planes["coherence"] = MatrixPlane(est.coherence, est.bins, est.blocks);
  return c;
}

}  // namespace modex
