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

#include "modex/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "modex/error.hpp"

namespace modex {

KneeResult KneeThreshold(const Spectrogram& spec, std::size_t grid_points) {
  spec.ExpectKind({SpectrogramKind::kWhitened, SpectrogramKind::kLogPower, SpectrogramKind::kPower},
                  "knee_threshold");
  if (grid_points < 3) throw Error(ErrorCode::kInvalidConfig, "grid_points must be >= 3");
  const std::size_t guard = std::min(spec.guard_bins(), spec.bins());
  const std::size_t band = spec.bins() - guard;
  const std::size_t count = band * spec.frames();
  if (count == 0) throw Error(ErrorCode::kDegenerateDistribution, "no in-band values");

  double mean = 0.0;
  double vmax = -INFINITY;
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    auto col = spec.frame(t);
    for (std::size_t f = guard; f < col.size(); ++f) {
      if (!std::isfinite(col[f])) throw Error(ErrorCode::kNonFinite, "knee_threshold input contains non-finite values");
      mean += col[f];
      vmax = std::max(vmax, col[f]);
    }
  }
  mean /= static_cast<double>(count);
  const double vmin = std::min(mean, vmax);
  if (!(vmax > vmin)) throw Error(ErrorCode::kDegenerateDistribution, "all in-band values are equal after mean flooring");

  // Counts of floored values falling in (x[i-1], x[i]].
  const double step = (vmax - vmin) / static_cast<double>(grid_points - 1);
  KneeResult r;
  r.floor_value = mean;
  r.cdf_x.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) r.cdf_x[i] = vmin + step * static_cast<double>(i);
  r.cdf_x.back() = vmax;
  std::vector<std::size_t> hist(grid_points, 0);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    auto col = spec.frame(t);
    for (std::size_t f = guard; f < col.size(); ++f) {
      const double v = std::max(col[f], mean);
      auto i = static_cast<std::ptrdiff_t>(std::ceil((v - vmin) / step));
      i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(grid_points) - 1);
      while (i > 0 && r.cdf_x[static_cast<std::size_t>(i - 1)] >= v) --i;
      while (static_cast<std::size_t>(i) + 1 < grid_points && r.cdf_x[static_cast<std::size_t>(i)] < v) ++i;
      ++hist[static_cast<std::size_t>(i)];
    }
  }
  r.cdf_y.resize(grid_points);
  std::size_t acc = 0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    acc += hist[i];
    r.cdf_y[i] = static_cast<double>(acc) / static_cast<double>(count);
  }
  r.cdf_y.back() = 1.0;

  // Chord from (0, y0) to (1, 1) in normalized coordinates.
  const double y0 = r.cdf_y.front();
  const double rise = 1.0 - y0;
  const double norm = std::sqrt(rise * rise + 1.0);
  r.max_distance = -1.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const double d = std::abs(r.cdf_y[i] - y0 - rise * x) / norm;
    if (d > r.max_distance) {
      r.max_distance = d;
      r.knee_index = i;
    }
  }
  r.threshold = r.cdf_x[r.knee_index];
  return r;
}

Spectrogram ApplyThreshold(const Spectrogram& spec, double threshold) {
  spec.ExpectKind({SpectrogramKind::kWhitened, SpectrogramKind::kLogPower, SpectrogramKind::kPower},
                  "apply_threshold");
  Spectrogram mask = spec.Like(SpectrogramKind::kMask);
  const std::size_t guard = std::min(spec.guard_bins(), spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    auto in = spec.frame(t);
    auto out = mask.frame(t);
    for (std::size_t f = guard; f < in.size(); ++f) out[f] = in[f] >= threshold ? 1.0 : 0.0;
  }
  return mask;
}

nlohmann::json ToJson(const KneeResult& knee, bool with_grid) {
  nlohmann::json j = {
      {"threshold", knee.threshold},
      {"max_distance", knee.max_distance},
      {"knee_index", knee.knee_index},
      {"floor_value", knee.floor_value},
      {"grid_points", knee.cdf_x.size()},
  };
  if (with_grid) {
    j["cdf_x"] = knee.cdf_x;
    j["cdf_y"] = knee.cdf_y;
  }
  return j;
}

}  // namespace modex
