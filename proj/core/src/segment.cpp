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

#include "modex/segment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "modex/error.hpp"

namespace modex {
namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

double MedianOf(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double ParseDouble(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(ErrorCode::kIoError, "bad number '" + s + "'");
  return v;
}

}  // namespace

std::string_view ToString(RegionKind kind) {
  return kind == RegionKind::kTransient ? "transient" : "coherent";
}

RegionKind RegionKindFromString(std::string_view s) {
  if (s == "coherent") return RegionKind::kCoherent;
  if (s == "transient") return RegionKind::kTransient;
  throw Error(ErrorCode::kIoError, "unknown region kind '" + std::string(s) + "'");
}

bool TransientProfile::flagged(std::size_t t) const {
  return std::binary_search(flagged_frames.begin(), flagged_frames.end(), t);
}

TransientProfile FlagTransients(const Spectrogram& whitened, const Spectrogram& mask, double k_mad,
                                double min_coverage) {
  whitened.ExpectKind({SpectrogramKind::kWhitened}, "flag_transients");
  mask.ExpectKind({SpectrogramKind::kMask}, "flag_transients");
  ExpectSameGrid(whitened, mask, "flag_transients");
  const std::size_t guard = std::min(whitened.guard_bins(), whitened.bins());
  const std::size_t band = whitened.bins() - guard;
  TransientProfile p;
  p.column_score.assign(whitened.frames(), 0.0);
  if (band == 0) return p;
  std::vector<double> coverage(whitened.frames(), 0.0);
  for (std::size_t t = 0; t < whitened.frames(); ++t) {
    auto w = whitened.frame(t);
    auto m = mask.frame(t);
    double s = 0.0, c = 0.0;
    for (std::size_t f = guard; f < w.size(); ++f) {
      s += w[f];
      c += m[f] != 0.0 ? 1.0 : 0.0;
    }
    p.column_score[t] = s / static_cast<double>(band);
    coverage[t] = c / static_cast<double>(band);
  }
  const double med = MedianOf(p.column_score);
  std::vector<double> dev(p.column_score.size());
  for (std::size_t t = 0; t < dev.size(); ++t) dev[t] = std::abs(p.column_score[t] - med);
  const double limit = med + k_mad * 1.4826 * MedianOf(dev);
  for (std::size_t t = 0; t < p.column_score.size(); ++t) {
    if (p.column_score[t] > limit && coverage[t] >= min_coverage) p.flagged_frames.push_back(t);
  }
  return p;
}

std::vector<std::size_t> TransientSpan(const TransientProfile& profile, double k_low) {
  const auto& score = profile.column_score;
  if (profile.flagged_frames.empty()) return {};
  const double med = MedianOf(score);
  std::vector<double> dev(score.size());
  for (std::size_t t = 0; t < dev.size(); ++t) dev[t] = std::abs(score[t] - med);
  const double limit = med + k_low * 1.4826 * MedianOf(dev);
  std::vector<std::uint8_t> in(score.size(), 0);
  for (std::size_t t : profile.flagged_frames) {
    if (t >= score.size() || in[t]) continue;
    in[t] = 1;
    for (std::size_t u = t; u > 0 && score[u - 1] > limit; --u) in[u - 1] = 1;
    for (std::size_t u = t + 1; u < score.size() && score[u] > limit; ++u) in[u] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < in.size(); ++t) {
    if (in[t]) out.push_back(t);
  }
  return out;
}

std::vector<RegionRecord> LabelRegions(const Spectrogram& mask, Connectivity connectivity,
                                       std::size_t min_region_pixels) {
  mask.ExpectKind({SpectrogramKind::kMask}, "label_regions");
  const std::size_t bins = mask.bins();
  const std::size_t frames = mask.frames();
  auto on = [&](std::size_t f, std::size_t t) { return mask.at(f, t) != 0.0; };

  UnionFind uf(mask.size());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      if (!on(f, t)) continue;
      const std::size_t i = t * bins + f;
      if (f > 0 && on(f - 1, t)) uf.Union(i, i - 1);
      if (t == 0) continue;
      if (on(f, t - 1)) uf.Union(i, i - bins);
      if (connectivity == Connectivity::kEight) {
        if (f > 0 && on(f - 1, t - 1)) uf.Union(i, i - bins - 1);
        if (f + 1 < bins && on(f + 1, t - 1)) uf.Union(i, i - bins + 1);
      }
    }
  }

  // Roots are the smallest member index, so components appear in scan order.
  std::vector<std::size_t> slot(mask.size(), SIZE_MAX);
  std::vector<RegionRecord> regions;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      if (!on(f, t)) continue;
      const std::size_t i = t * bins + f;
      const std::size_t root = uf.Find(i);
      if (slot[root] == SIZE_MAX) {
        slot[root] = regions.size();
        RegionRecord r;
        r.f_lo = r.f_hi = f;
        r.t_lo = r.t_hi = t;
        regions.push_back(std::move(r));
      }
      RegionRecord& r = regions[slot[root]];
      r.pixels.push_back(i);
      r.f_lo = std::min(r.f_lo, f);
      r.f_hi = std::max(r.f_hi, f);
      r.t_hi = std::max(r.t_hi, t);
    }
  }
  std::erase_if(regions, [&](const RegionRecord& r) { return r.pixels.size() < min_region_pixels; });
  const auto& axes = mask.axes();
  for (auto& r : regions) {
    r.pixel_count = r.pixels.size();
    r.f_min_khz = axes.freq_hz[r.f_lo] / 1e3;
    r.f_max_khz = axes.freq_hz[r.f_hi] / 1e3;
    r.t_min_ms = axes.time_ms[r.t_lo];
    r.t_max_ms = axes.time_ms[r.t_hi];
  }
  AssignLabels(regions);
  return regions;
}

void AssignLabels(std::vector<RegionRecord>& regions) {
  std::stable_sort(regions.begin(), regions.end(), [](const RegionRecord& a, const RegionRecord& b) {
    if (a.pixel_count != b.pixel_count) return a.pixel_count > b.pixel_count;
    if (a.t_lo != b.t_lo) return a.t_lo < b.t_lo;
    return a.f_lo < b.f_lo;
  });
  for (std::size_t k = 0; k < regions.size(); ++k) regions[k].label = static_cast<int>(k + 1);
}

std::vector<RegionRecord> MeasureRegions(std::vector<RegionRecord> regions, const Spectrogram& power,
                                         const TransientProfile& transients, double transient_fraction) {
  power.ExpectKind({SpectrogramKind::kPower}, "measure_regions");
  if (transients.column_score.size() != power.frames() && !transients.column_score.empty()) {
    throw Error(ErrorCode::kDimMismatch, "measure_regions: transient profile does not match spectrogram");
  }
  const std::size_t bins = power.bins();
  for (auto& r : regions) {
    double amp = 0.0;
    std::vector<std::size_t> frames;
    for (std::size_t i : r.pixels) {
      if (i >= power.size()) throw Error(ErrorCode::kDimMismatch, "measure_regions: region outside spectrogram");
      amp += power.values()[i];
      const std::size_t t = i / bins;
      if (frames.empty() || frames.back() != t) frames.push_back(t);
    }
    std::size_t hit = 0;
    for (std::size_t t : frames) hit += transients.flagged(t) ? 1 : 0;
    r.amplitude = amp;
    r.amplitude_db = 10.0 * std::log10(amp);
    r.kind = !frames.empty() && static_cast<double>(hit) >= transient_fraction * static_cast<double>(frames.size())
                 ? RegionKind::kTransient
                 : RegionKind::kCoherent;
  }
  return regions;
}

Spectrogram GateSpectrogram(const Spectrogram& power, const Spectrogram& mask) {
  power.ExpectKind({SpectrogramKind::kPower}, "gate_spectrogram");
  mask.ExpectKind({SpectrogramKind::kMask}, "gate_spectrogram");
  ExpectSameGrid(power, mask, "gate_spectrogram");
  Spectrogram out = power;
  auto o = out.values();
  auto m = mask.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (m[i] == 0.0) o[i] = 0.0;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void WriteRegionsCsv(std::ostream& os, const std::vector<RegionRecord>& regions) {
  os << kRegionCsvHeader << '\n';
  for (const auto& r : regions) {
    os << r.label << ',' << ToString(r.kind) << ',' << FormatDouble(r.f_min_khz) << ','
       << FormatDouble(r.f_max_khz) << ',' << FormatDouble(r.t_min_ms) << ',' << FormatDouble(r.t_max_ms)
       << ',' << FormatDouble(r.amplitude) << ',' << FormatDouble(r.amplitude_db) << ',' << r.pixel_count
       << '\n';
  }
}

std::vector<RegionRecord> ReadRegionsCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRegionCsvHeader) {
    throw Error(ErrorCode::kIoError, "region CSV header does not match schema");
  }
  std::vector<RegionRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw Error(ErrorCode::kIoError, "region CSV row has wrong field count");
    RegionRecord r;
    r.label = static_cast<int>(ParseDouble(cells[0]));
    r.kind = RegionKindFromString(cells[1]);
    r.f_min_khz = ParseDouble(cells[2]);
    r.f_max_khz = ParseDouble(cells[3]);
    r.t_min_ms = ParseDouble(cells[4]);
    r.t_max_ms = ParseDouble(cells[5]);
    r.amplitude = ParseDouble(cells[6]);
    r.amplitude_db = ParseDouble(cells[7]);
    r.pixel_count = static_cast<std::size_t>(ParseDouble(cells[8]));
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json EncodeRuns(const std::vector<std::size_t>& sorted_indices) {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t k = 0;
  while (k < sorted_indices.size()) {
    std::size_t len = 1;
    while (k + len < sorted_indices.size() && sorted_indices[k + len] == sorted_indices[k] + len) ++len;
    runs.push_back({sorted_indices[k], len});
    k += len;
  }
  return runs;
}

std::vector<std::size_t> DecodeRuns(const nlohmann::json& runs) {
  std::vector<std::size_t> out;
  for (const auto& run : runs) {
    const auto start = run.at(0).get<std::size_t>();
    const auto len = run.at(1).get<std::size_t>();
    for (std::size_t i = 0; i < len; ++i) out.push_back(start + i);
  }
  return out;
}

nlohmann::ordered_json ToJson(const RegionRecord& r, bool with_support) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["kind"] = ToString(r.kind);
  j["f_min_khz"] = r.f_min_khz;
  j["f_max_khz"] = r.f_max_khz;
  j["t_min_ms"] = r.t_min_ms;
  j["t_max_ms"] = r.t_max_ms;
  j["amplitude"] = r.amplitude;
  j["amplitude_db"] = r.amplitude_db;
  j["pixel_count"] = r.pixel_count;
  if (with_support) {
    j["grid"] = {r.f_lo, r.f_hi, r.t_lo, r.t_hi};
    j["support"] = EncodeRuns(r.pixels);
  }
  return j;
}

RegionRecord RegionFromJson(const nlohmann::json& j) {
  RegionRecord r;
  try {
    r.label = j.at("label").get<int>();
    r.kind = RegionKindFromString(j.at("kind").get<std::string>());
    r.f_min_khz = j.at("f_min_khz").get<double>();
    r.f_max_khz = j.at("f_max_khz").get<double>();
    r.t_min_ms = j.at("t_min_ms").get<double>();
    r.t_max_ms = j.at("t_max_ms").get<double>();
    r.amplitude = j.at("amplitude").get<double>();
    r.amplitude_db = j.at("amplitude_db").get<double>();
    r.pixel_count = j.at("pixel_count").get<std::size_t>();
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      r.f_lo = g.at(0).get<std::size_t>();
      r.f_hi = g.at(1).get<std::size_t>();
      r.t_lo = g.at(2).get<std::size_t>();
      r.t_hi = g.at(3).get<std::size_t>();
    }
    if (j.contains("support")) r.pixels = DecodeRuns(j.at("support"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("malformed region record: ") + e.what());
  }
  return r;
}

void WriteRegionsJsonl(std::ostream& os, const std::vector<RegionRecord>& regions, bool with_support) {
  for (const auto& r : regions) os << ToJson(r, with_support).dump() << '\n';
}

std::vector<RegionRecord> ReadRegionsJsonl(std::istream& is) {
  std::vector<RegionRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIoError, std::string("malformed JSON line: ") + e.what());
    }
    out.push_back(RegionFromJson(j));
  }
  return out;
}

}  // namespace modex
