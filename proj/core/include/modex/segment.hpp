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

#ifndef MODEX_SEGMENT_HPP_
#define MODEX_SEGMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modex/spectrogram.hpp"

namespace modex {

enum class RegionKind { kCoherent, kTransient };

std::string_view ToString(RegionKind kind);
RegionKind RegionKindFromString(std::string_view s);

struct RegionRecord {
  int label = 0;
  RegionKind kind = RegionKind::kCoherent;
  double f_min_khz = 0.0;
  double f_max_khz = 0.0;
  double t_min_ms = 0.0;
  double t_max_ms = 0.0;
  double amplitude = 0.0;     // summed linear power
  double amplitude_db = 0.0;  // 10 log10(amplitude)
  std::size_t pixel_count = 0;

  // Grid extent (inclusive) and member pixels as frame-major linear indices
  // t * bins + f, ascending. Not part of the CSV schema.
  std::size_t f_lo = 0, f_hi = 0, t_lo = 0, t_hi = 0;
  std::vector<std::size_t> pixels;
};

struct TransientProfile {
  std::vector<double> column_score;
  std::vector<std::size_t> flagged_frames;  // ascending

  bool flagged(std::size_t t) const;
};

// Frames whose mean in-band whitened value exceeds median + k_mad * 1.4826
// * MAD of all frame means and whose in-band mask coverage is >= 0.3.
TransientProfile FlagTransients(const Spectrogram& whitened, const Spectrogram& mask,
                                double k_mad = 5.0, double min_coverage = 0.3);

// Flagged frames grown through neighbouring frames whose column score
// exceeds median + k_low * 1.4826 * MAD. Ascending.
std::vector<std::size_t> TransientSpan(const TransientProfile& profile, double k_low);

enum class Connectivity { kFour = 4, kEight = 8 };

// Connected components of the mask; components below min_region_pixels are
// dropped. Labels start at 1 in decreasing pixel_count order, ties broken by
// (t_min, f_min).
std::vector<RegionRecord> LabelRegions(const Spectrogram& mask,
                                       Connectivity connectivity = Connectivity::kEight,
                                       std::size_t min_region_pixels = 12);

// Sorts by decreasing pixel_count, ties by (t_min, f_min), and renumbers
// labels from 1.
void AssignLabels(std::vector<RegionRecord>& regions);

// Amplitude from the linear power spectrogram; kind transient when at least
// `transient_fraction` of the region's frames are flagged.
std::vector<RegionRecord> MeasureRegions(std::vector<RegionRecord> regions, const Spectrogram& power,
                                         const TransientProfile& transients,
                                         double transient_fraction = 0.5);

// Power where mask is set, zero elsewhere.
Spectrogram GateSpectrogram(const Spectrogram& power, const Spectrogram& mask);

// Region database output. Numbers use the shortest representation that
// parses back to the same double.
inline constexpr std::string_view kRegionCsvHeader =
    "label,kind,f_min_khz,f_max_khz,t_min_ms,t_max_ms,amplitude,amplitude_db,pixel_count";

std::string FormatDouble(double v);
void WriteRegionsCsv(std::ostream& os, const std::vector<RegionRecord>& regions);
void WriteRegionsJsonl(std::ostream& os, const std::vector<RegionRecord>& regions,
                       bool with_support = false);
std::vector<RegionRecord> ReadRegionsCsv(std::istream& is);
std::vector<RegionRecord> ReadRegionsJsonl(std::istream& is);

nlohmann::ordered_json ToJson(const RegionRecord& r, bool with_support = false);
RegionRecord RegionFromJson(const nlohmann::json& j);

// Run-length encoding of ascending linear indices as [start, length] pairs.
nlohmann::json EncodeRuns(const std::vector<std::size_t>& sorted_indices);
std::vector<std::size_t> DecodeRuns(const nlohmann::json& runs);

}  // namespace modex

#endif  // MODEX_SEGMENT_HPP_
