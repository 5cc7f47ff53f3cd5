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

#ifndef MODEX_THRESHOLD_HPP_
#define MODEX_THRESHOLD_HPP_

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "modex/spectrogram.hpp"

namespace modex {

struct KneeResult {
  double threshold = 0.0;
  std::vector<double> cdf_x;  // intensity grid, ascending
  std::vector<double> cdf_y;  // fraction of floored values <= cdf_x
  std::size_t knee_index = 0;
  double max_distance = 0.0;  // in normalized CDF units
  double floor_value = 0.0;   // in-band mean used for flooring
};

// Global knee threshold of the in-band intensity CDF. Values below the
// in-band mean are raised to it, the CDF is sampled on `grid_points`
// uniformly spaced intensities, both axes are scaled to [0, 1], and the
// knee is the grid point farthest from the chord (0, cdf_y[0]) - (1, 1).
KneeResult KneeThreshold(const Spectrogram& spec, std::size_t grid_points = 2048);

// 1 where value >= threshold outside the guard band, else 0.
Spectrogram ApplyThreshold(const Spectrogram& spec, double threshold);
inline Spectrogram ApplyThreshold(const Spectrogram& spec, const KneeResult& knee) {
  return ApplyThreshold(spec, knee.threshold);
}

// threshold, max_distance, knee_index, floor_value, grid_points; the grid
// itself when `with_grid`.
nlohmann::json ToJson(const KneeResult& knee, bool with_grid = false);

}  // namespace modex

#endif  // MODEX_THRESHOLD_HPP_
