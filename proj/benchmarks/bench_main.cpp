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

#include "bench_util.hpp"

#include <benchmark/benchmark.h>

#include "modex/synth.hpp"

namespace modex::bench {

const std::vector<ChannelSeries>& Shot(double seconds, int channels) {
  static std::map<std::pair<double, int>, std::vector<ChannelSeries>> cache;
  auto& slot = cache[{seconds, channels}];
  if (slot.empty()) {
    SyntheticShotSpec spec;
    spec.duration_s = seconds;
    spec.channels = channels;
    spec.seed = 7;
    spec.tones.push_back({30000.0, 80000.0, 0.1 * seconds, 0.6 * seconds, 1.0});
    spec.qc_bands.push_back({150000.0, 6000.0, 0.5, 0.2 * seconds, 0.9 * seconds});
    spec.background = {1.5, 10.0, 1000.0, false};
    spec.transients.push_back({0.5 * seconds, 2e-4, 40.0});
    spec.noise.sigma = {1.0};
    slot = GenerateShot(spec).first;
  }
  return slot;
}

}  // namespace modex::bench

BENCHMARK_MAIN();
