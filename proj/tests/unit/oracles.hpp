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

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <utility>
#include <vector>

#include "modex/spectrogram.hpp"

namespace modex::testing {

// Breadth-first flood fill; components as sorted frame-major index lists.
inline std::set<std::vector<std::size_t>> FloodFill(const Spectrogram& m, bool eight, std::size_t min_pixels) {
  const auto bins = static_cast<long>(m.bins()), frames = static_cast<long>(m.frames());
  std::vector<char> seen(m.size(), 0);
  std::set<std::vector<std::size_t>> out;
  for (long t = 0; t < frames; ++t) {
    for (long f = 0; f < bins; ++f) {
      const auto start = static_cast<std::size_t>(t * bins + f);
      if (m.values()[start] == 0.0 || seen[start]) continue;
      std::vector<std::size_t> comp;
      std::deque<std::pair<long, long>> q{{f, t}};
      seen[start] = 1;
      while (!q.empty()) {
        const auto [cf, ct] = q.front();
        q.pop_front();
        comp.push_back(static_cast<std::size_t>(ct * bins + cf));
        for (long dt = -1; dt <= 1; ++dt) {
          for (long df = -1; df <= 1; ++df) {
            if ((dt == 0 && df == 0) || (!eight && dt != 0 && df != 0)) continue;
            const long nf = cf + df, nt = ct + dt;
            if (nf < 0 || nt < 0 || nf >= bins || nt >= frames) continue;
            const auto j = static_cast<std::size_t>(nt * bins + nf);
            if (m.values()[j] != 0.0 && !seen[j]) {
              seen[j] = 1;
              q.emplace_back(nf, nt);
            }
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      if (comp.size() >= min_pixels) out.insert(comp);
    }
  }
  return out;
}

// Exhaustive scan of the exact empirical CDF of the mean-floored values. The
// step CDF is evaluated at every distinct value and at the left limit of the
// next one, the two places where the chord distance can peak on each step.
inline double BruteForceKnee(std::vector<double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x = std::max(x, mean);
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  const double n = static_cast<double>(v.size());
  std::vector<std::pair<double, double>> steps;  // value, F(value)
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 == v.size() || v[i + 1] != v[i]) steps.emplace_back(v[i], static_cast<double>(i + 1) / n);
  }
  const double y0 = steps.front().second;
  const double rise = 1.0 - y0;
  auto distance = [&](double value, double cdf) {
    const double x = (value - lo) / (hi - lo);
    return std::abs(cdf - y0 - rise * x) / std::sqrt(rise * rise + 1.0);
  };
  double best = -1.0, where = lo;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (double d = distance(steps[k].first, steps[k].second); d > best) {
      best = d;
      where = steps[k].first;
    }
    if (k + 1 < steps.size()) {
      if (double d = distance(steps[k + 1].first, steps[k].second); d > best) {
        best = d;
        where = steps[k + 1].first;
      }
    }
  }
  return where;
}

}  // namespace modex::testing
