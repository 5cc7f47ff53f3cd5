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

#include "modex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "modex/error.hpp"
#include "modex/iir.hpp"

namespace modex {
namespace {

constexpr std::uint64_t kNoiseStream = 1000;
constexpr std::uint64_t kBackgroundStream = 2000;
constexpr std::uint64_t kQcStream = 3000;
constexpr std::uint64_t kTransientStream = 4000;

std::mt19937_64 StreamRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> GaussianNoise(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  auto rng = StreamRng(seed, stream);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

[[noreturn]] void Invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidSpec, msg); }

double RaisedCosineEnvelope(double t, double start, double end, double ramp) {
  if (t < start || t >= end) return 0.0;
  const double r = std::min(ramp, 0.5 * (end - start));
  if (r <= 0.0) return 1.0;
  if (t < start + r) return 0.5 * (1.0 - std::cos(std::numbers::pi * (t - start) / r));
  if (t > end - r) return 0.5 * (1.0 - std::cos(std::numbers::pi * (end - t) / r));
  return 1.0;
}

double Energy(const std::vector<double>& x, double fs) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e / fs;
}

double FrameCenterS(const SpectrogramAxes& axes, std::size_t t) { return axes.time_ms[t] / 1e3; }

std::size_t NearestBin(const SpectrogramAxes& axes, double f_hz) {
  const double df = axes.sample_rate_hz / static_cast<double>(axes.window_len);
  const auto k = static_cast<std::ptrdiff_t>(std::lround(f_hz / df));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(axes.bins()) - 1));
}

template <typename T>
T Get(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::size_t SyntheticShotSpec::samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

double SyntheticShotSpec::sigma(int channel) const {
  if (noise.sigma.empty()) return 0.0;
  if (noise.sigma.size() == 1) return noise.sigma[0];
  return noise.sigma.at(static_cast<std::size_t>(channel));
}

void SyntheticShotSpec::Validate() const {
  if (!(duration_s > 0.0)) Invalid("duration_s must be positive");
  if (!(sample_rate_hz > 0.0)) Invalid("sample_rate_hz must be positive");
  if (channels < 1) Invalid("channels must be >= 1");
  const double nyq = sample_rate_hz / 2.0;
  auto in_time = [&](double t) { return t >= 0.0 && t <= duration_s; };
  for (const auto& tone : tones) {
    if (!in_time(tone.t_start_s) || !in_time(tone.t_end_s) || tone.t_end_s <= tone.t_start_s) {
      Invalid("tone times must satisfy 0 <= t_start < t_end <= duration");
    }
    if (tone.f0_hz < 0.0 || tone.f1_hz < 0.0 || tone.f0_hz > nyq || tone.f1_hz > nyq) {
      Invalid("tone frequencies must lie in [0, Nyquist]");
    }
    if (tone.amplitude < 0.0 || tone.ramp_s < 0.0) Invalid("tone amplitude and ramp must be >= 0");
    if (!tone.shared && (tone.channel < 0 || tone.channel >= channels)) Invalid("tone channel out of range");
  }
  for (const auto& qc : qc_bands) {
    if (!(qc.bandwidth_hz > 0.0) || qc.center_hz - qc.bandwidth_hz / 2 <= 0.0 ||
        qc.center_hz + qc.bandwidth_hz / 2 >= nyq) {
      Invalid("quasi-coherent band must lie inside (0, Nyquist)");
    }
    if (qc.amplitude < 0.0) Invalid("quasi-coherent amplitude must be >= 0");
    const double end = qc.t_end_s < 0.0 ? duration_s : qc.t_end_s;
    if (!in_time(qc.t_start_s) || !in_time(end) || end <= qc.t_start_s) Invalid("quasi-coherent band times out of range");
  }
  if (background.chi < 0.0 || background.chi > 3.0) Invalid("background chi must lie in [0, 3]");
  if (background.amplitude < 0.0 || !(background.ref_hz > 0.0)) Invalid("background amplitude/ref invalid");
  for (const auto& tr : transients) {
    if (!in_time(tr.t_s) || !(tr.width_s > 0.0) || tr.amplitude < 0.0) Invalid("transient out of range");
  }
  if (noise.sigma.size() > 1 && noise.sigma.size() != static_cast<std::size_t>(channels)) {
    Invalid("noise sigma must have one entry or one per channel");
  }
  for (double s : noise.sigma) {
    if (s < 0.0) Invalid("noise sigma must be >= 0");
  }
}

SyntheticShotSpec ShotSpecFromJson(const nlohmann::json& j) {
  SyntheticShotSpec s;
  try {
    s.shot_id = Get<std::string>(j, "shot_id", s.shot_id);
    s.duration_s = Get(j, "duration_s", s.duration_s);
    s.sample_rate_hz = Get(j, "sample_rate_hz", s.sample_rate_hz);
    s.channels = Get(j, "channels", s.channels);
    s.seed = Get<std::uint64_t>(j, "seed", s.seed);
    for (const auto& t : Get(j, "tones", nlohmann::json::array())) {
      ToneSpec tone;
      tone.f0_hz = t.at("f0_hz").get<double>();
      tone.f1_hz = Get(t, "f1_hz", tone.f0_hz);
      tone.t_start_s = t.at("t_start_s").get<double>();
      tone.t_end_s = t.at("t_end_s").get<double>();
      tone.amplitude = t.at("amplitude").get<double>();
      tone.shared = Get(t, "shared", tone.shared);
      tone.channel = Get(t, "channel", tone.channel);
      tone.ramp_s = Get(t, "ramp_s", tone.ramp_s);
      s.tones.push_back(tone);
    }
    for (const auto& q : Get(j, "qc_bands", nlohmann::json::array())) {
      QcBandSpec qc;
      qc.center_hz = q.at("center_hz").get<double>();
      qc.bandwidth_hz = q.at("bandwidth_hz").get<double>();
      qc.amplitude = q.at("amplitude").get<double>();
      qc.t_start_s = Get(q, "t_start_s", qc.t_start_s);
      qc.t_end_s = Get(q, "t_end_s", qc.t_end_s);
      qc.ramp_s = Get(q, "ramp_s", qc.ramp_s);
      s.qc_bands.push_back(qc);
    }
    if (j.contains("background")) {
      const auto& b = j.at("background");
      s.background.chi = Get(b, "chi", 0.0);
      s.background.amplitude = Get(b, "amplitude", 0.0);
      s.background.ref_hz = Get(b, "ref_hz", s.background.ref_hz);
      s.background.shared = Get(b, "shared", false);
    }
    for (const auto& t : Get(j, "transients", nlohmann::json::array())) {
      s.transients.push_back({t.at("t_s").get<double>(), t.at("width_s").get<double>(),
                              t.at("amplitude").get<double>()});
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      const std::string kind = Get<std::string>(n, "kind", "gaussian");
      if (kind == "gaussian") {
        s.noise.kind = NoiseKind::kGaussian;
      } else if (kind == "laplacian") {
        s.noise.kind = NoiseKind::kLaplacian;
      } else if (kind == "uniform") {
        s.noise.kind = NoiseKind::kUniform;
      } else {
        Invalid("unknown noise kind '" + kind + "'");
      }
      if (n.contains("sigma")) {
        if (n.at("sigma").is_array()) {
          s.noise.sigma = n.at("sigma").get<std::vector<double>>();
        } else {
          s.noise.sigma = {n.at("sigma").get<double>()};
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Invalid(std::string("malformed shot spec: ") + e.what());
  }
  s.Validate();
  return s;
}

nlohmann::json ToJson(const SyntheticShotSpec& s) {
  nlohmann::json j;
  j["shot_id"] = s.shot_id;
  j["duration_s"] = s.duration_s;
  j["sample_rate_hz"] = s.sample_rate_hz;
  j["channels"] = s.channels;
  j["seed"] = s.seed;
  j["tones"] = nlohmann::json::array();
  for (const auto& t : s.tones) {
    j["tones"].push_back({{"f0_hz", t.f0_hz}, {"f1_hz", t.f1_hz}, {"t_start_s", t.t_start_s},
                          {"t_end_s", t.t_end_s}, {"amplitude", t.amplitude}, {"shared", t.shared},
                          {"channel", t.channel}, {"ramp_s", t.ramp_s}});
  }
  j["qc_bands"] = nlohmann::json::array();
  for (const auto& q : s.qc_bands) {
    j["qc_bands"].push_back({{"center_hz", q.center_hz}, {"bandwidth_hz", q.bandwidth_hz},
                             {"amplitude", q.amplitude}, {"t_start_s", q.t_start_s},
                             {"t_end_s", q.t_end_s}, {"ramp_s", q.ramp_s}});
  }
  j["background"] = {{"chi", s.background.chi}, {"amplitude", s.background.amplitude},
                     {"ref_hz", s.background.ref_hz}, {"shared", s.background.shared}};
  j["transients"] = nlohmann::json::array();
  for (const auto& t : s.transients) {
    j["transients"].push_back({{"t_s", t.t_s}, {"width_s", t.width_s}, {"amplitude", t.amplitude}});
  }
  const char* kinds[] = {"gaussian", "laplacian", "uniform"};
  j["noise"] = {{"kind", kinds[static_cast<int>(s.noise.kind)]}, {"sigma", s.noise.sigma}};
  return j;
}

std::string_view ToString(ComponentClass c) {
  switch (c) {
    case ComponentClass::kCoherent: return "coherent";
    case ComponentClass::kQuasiCoherent: return "quasi_coherent";
    case ComponentClass::kTransient: return "transient";
  }
  return "coherent";
}

nlohmann::json ToJson(const GroundTruth& truth) {
  nlohmann::json j;
  j["shot_id"] = truth.shot_id;
  j["grid"] = {{"bins", truth.axes.bins()},
               {"frames", truth.axes.frames()},
               {"window_len", truth.axes.window_len},
               {"hop", truth.axes.hop},
               {"sample_rate_hz", truth.axes.sample_rate_hz},
               {"t0_ms", truth.axes.frames() ? truth.axes.time_ms[0] - 1e3 * (truth.axes.window_len / 2) /
                                                                         truth.axes.sample_rate_hz
                                             : 0.0}};
  j["components"] = nlohmann::json::array();
  for (const auto& c : truth.components) {
    nlohmann::json cj = {{"id", c.id},
                         {"class", ToString(c.cls)},
                         {"t_start_s", c.t_start_s},
                         {"t_end_s", c.t_end_s},
                         {"f_lo_hz", c.f_lo_hz},
                         {"f_hi_hz", c.f_hi_hz},
                         {"measured_energy", c.measured_energy},
                         {"support", EncodeRuns(c.support)}};
    if (c.analytic_energy >= 0.0) cj["analytic_energy"] = c.analytic_energy;
    if (c.cls == ComponentClass::kTransient) cj["peak_frame"] = c.peak_frame;
    j["components"].push_back(std::move(cj));
  }
  return j;
}

GroundTruth GroundTruthFromJson(const nlohmann::json& j) {
  GroundTruth g;
  try {
    g.shot_id = j.at("shot_id").get<std::string>();
    const auto& grid = j.at("grid");
    const auto samples = (grid.at("frames").get<std::size_t>() - 1) * grid.at("hop").get<std::size_t>() +
                         grid.at("window_len").get<std::size_t>();
    StftConfig cfg;
    cfg.window_len = grid.at("window_len").get<std::size_t>();
    cfg.overlap_fraction = 1.0 - static_cast<double>(grid.at("hop").get<std::size_t>()) /
                                     static_cast<double>(cfg.window_len);
    g.axes = StftAxes(samples, grid.at("sample_rate_hz").get<double>(), Get(grid, "t0_ms", 0.0), cfg);
    for (const auto& cj : j.at("components")) {
      TruthComponent c;
      c.id = cj.at("id").get<std::string>();
      const auto cls = cj.at("class").get<std::string>();
      c.cls = cls == "transient"        ? ComponentClass::kTransient
              : cls == "quasi_coherent" ? ComponentClass::kQuasiCoherent
                                        : ComponentClass::kCoherent;
      c.t_start_s = cj.at("t_start_s").get<double>();
      c.t_end_s = cj.at("t_end_s").get<double>();
      c.f_lo_hz = cj.at("f_lo_hz").get<double>();
      c.f_hi_hz = cj.at("f_hi_hz").get<double>();
      c.measured_energy = cj.at("measured_energy").get<double>();
      c.analytic_energy = Get(cj, "analytic_energy", -1.0);
      c.peak_frame = Get<std::size_t>(cj, "peak_frame", 0);
      c.support = DecodeRuns(cj.at("support"));
      g.components.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("malformed ground truth: ") + e.what());
  }
  return g;
}

double ToneEnergy(const ToneSpec& tone) {
  const double T = tone.t_end_s - tone.t_start_s;
  const double r = std::min(tone.ramp_s, 0.5 * T);
  return tone.amplitude * tone.amplitude / 2.0 * (T - 1.25 * r);
}

std::pair<std::vector<ChannelSeries>, GroundTruth> GenerateShot(const SyntheticShotSpec& spec,
                                                                const StftConfig& stft) {
  spec.Validate();
  stft.Validate();
  const std::size_t n = spec.samples();
  const double fs = spec.sample_rate_hz;
  const auto k = static_cast<std::size_t>(spec.channels);

  GroundTruth truth;
  truth.shot_id = spec.shot_id;
  truth.axes = StftAxes(n, fs, 0.0, stft);
  const SpectrogramAxes& axes = truth.axes;
  const std::size_t bins = axes.bins();

  std::vector<std::vector<double>> chans(k, std::vector<double>(n, 0.0));
  std::vector<double> shared(n, 0.0);

  // Stochastic noise.
  for (std::size_t c = 0; c < k; ++c) {
    const double sigma = spec.sigma(static_cast<int>(c));
    if (sigma == 0.0) continue;
    auto rng = StreamRng(spec.seed, kNoiseStream + c);
    auto& x = chans[c];
    switch (spec.noise.kind) {
      case NoiseKind::kGaussian: {
        std::normal_distribution<double> d(0.0, sigma);
        for (double& v : x) v += d(rng);
        break;
      }
      case NoiseKind::kLaplacian: {
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        const double b = sigma / std::numbers::sqrt2;
        for (double& v : x) {
          const double s = u(rng);
          v += -b * (s < 0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(s));
        }
        break;
      }
      case NoiseKind::kUniform: {
        const double a = sigma * std::sqrt(3.0);
        std::uniform_real_distribution<double> u(-a, a);
        for (double& v : x) v += u(rng);
        break;
      }
    }
  }

  // 1/f^chi background by spectral shaping of white noise.
  if (spec.background.amplitude > 0.0) {
    detail::RealFft fft(n);
    std::vector<std::complex<double>> spectrum(fft.bins());
    std::vector<double> gain(fft.bins(), 0.0);
    for (std::size_t b = 1; b < gain.size(); ++b) {
      const double f = static_cast<double>(b) * fs / static_cast<double>(n);
      gain[b] = spec.background.amplitude * std::pow(f / spec.background.ref_hz, -spec.background.chi / 2.0) /
                static_cast<double>(n);
    }
    std::vector<double> out(n);
    const std::size_t copies = spec.background.shared ? 1 : k;
    for (std::size_t c = 0; c < copies; ++c) {
      const std::vector<double> w = GaussianNoise(n, spec.seed, kBackgroundStream + c);
      fft.Forward(w, spectrum);
      for (std::size_t b = 0; b < spectrum.size(); ++b) spectrum[b] *= gain[b];
      fft.Inverse(spectrum, out);
      auto& dst = spec.background.shared ? shared : chans[c];
      for (std::size_t i = 0; i < n; ++i) dst[i] += out[i];
    }
  }

  // Coherent tones and chirps.
  for (std::size_t i = 0; i < spec.tones.size(); ++i) {
    const ToneSpec& tone = spec.tones[i];
    std::vector<double> x(n, 0.0);
    const double T = tone.t_end_s - tone.t_start_s;
    const double rate = (tone.f1_hz - tone.f0_hz) / T;
    const auto s0 = static_cast<std::size_t>(std::max(0.0, std::floor(tone.t_start_s * fs)));
    const auto s1 = std::min(n, static_cast<std::size_t>(std::ceil(tone.t_end_s * fs)) + 1);
    for (std::size_t s = s0; s < s1; ++s) {
      const double t = static_cast<double>(s) / fs;
      const double env = RaisedCosineEnvelope(t, tone.t_start_s, tone.t_end_s, tone.ramp_s);
      if (env == 0.0) continue;
      const double tau = t - tone.t_start_s;
      x[s] = tone.amplitude * env * std::sin(2.0 * std::numbers::pi * (tone.f0_hz * tau + 0.5 * rate * tau * tau));
    }
    TruthComponent comp;
    comp.id = "tone" + std::to_string(i);
    comp.cls = ComponentClass::kCoherent;
    comp.t_start_s = tone.t_start_s;
    comp.t_end_s = tone.t_end_s;
    comp.f_lo_hz = std::min(tone.f0_hz, tone.f1_hz);
    comp.f_hi_hz = std::max(tone.f0_hz, tone.f1_hz);
    comp.analytic_energy = ToneEnergy(tone);
    comp.measured_energy = Energy(x, fs);
    for (std::size_t t = 0; t < axes.frames(); ++t) {
      const double tc = FrameCenterS(axes, t);
      if (tc < tone.t_start_s || tc > tone.t_end_s) continue;
      const double f = tone.f0_hz + rate * (tc - tone.t_start_s);
      comp.support.push_back(t * bins + NearestBin(axes, f));
    }
    truth.components.push_back(std::move(comp));
    if (tone.shared) {
      for (std::size_t s = 0; s < n; ++s) shared[s] += x[s];
    } else {
      auto& dst = chans[static_cast<std::size_t>(tone.channel)];
      for (std::size_t s = 0; s < n; ++s) dst[s] += x[s];
    }
  }

  // Quasi-coherent bands: Gaussian noise limited to [lo, hi] in the
  // frequency domain, unit RMS before scaling.
  for (std::size_t i = 0; i < spec.qc_bands.size(); ++i) {
    const QcBandSpec& qc = spec.qc_bands[i];
    const double end = qc.t_end_s < 0.0 ? spec.duration_s : qc.t_end_s;
    const double lo = qc.center_hz - qc.bandwidth_hz / 2.0;
    const double hi = qc.center_hz + qc.bandwidth_hz / 2.0;
    detail::RealFft fft(n);
    std::vector<std::complex<double>> spectrum(fft.bins());
    fft.Forward(GaussianNoise(n, spec.seed, kQcStream + i), spectrum);
    for (std::size_t b = 0; b < spectrum.size(); ++b) {
      const double f = static_cast<double>(b) * fs / static_cast<double>(n);
      if (f < lo || f > hi) spectrum[b] = 0.0;
    }
    std::vector<double> x(n);
    fft.Inverse(spectrum, x);
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double scale = ss > 0.0 ? qc.amplitude / std::sqrt(ss / static_cast<double>(n)) : 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      x[s] *= scale * RaisedCosineEnvelope(static_cast<double>(s) / fs, qc.t_start_s, end, qc.ramp_s);
    }
    TruthComponent comp;
    comp.id = "qc" + std::to_string(i);
    comp.cls = ComponentClass::kQuasiCoherent;
    comp.t_start_s = qc.t_start_s;
    comp.t_end_s = end;
    comp.f_lo_hz = lo;
    comp.f_hi_hz = hi;
    comp.measured_energy = Energy(x, fs);
    const std::size_t b_lo = std::min(NearestBin(axes, lo), NearestBin(axes, qc.center_hz));
    const std::size_t b_hi = std::max(NearestBin(axes, hi), NearestBin(axes, qc.center_hz));
    for (std::size_t t = 0; t < axes.frames(); ++t) {
      const double tc = FrameCenterS(axes, t);
      if (tc < qc.t_start_s || tc > end) continue;
      for (std::size_t b = b_lo; b <= b_hi; ++b) comp.support.push_back(t * bins + b);
    }
    truth.components.push_back(std::move(comp));
    for (std::size_t s = 0; s < n; ++s) shared[s] += x[s];
  }

  // Transients: Hann-enveloped white bursts, shared by all channels.
  const double window_s = static_cast<double>(stft.window_len) / fs;
  for (std::size_t i = 0; i < spec.transients.size(); ++i) {
    const TransientSpec& tr = spec.transients[i];
    auto rng = StreamRng(spec.seed, kTransientStream + i);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> x(n, 0.0);
    const double half = tr.width_s / 2.0;
    const auto s0 = static_cast<std::size_t>(std::max(0.0, std::floor((tr.t_s - half) * fs)));
    const auto s1 = std::min(n, static_cast<std::size_t>(std::ceil((tr.t_s + half) * fs)) + 1);
    for (std::size_t s = s0; s < s1; ++s) {
      const double dt = static_cast<double>(s) / fs - tr.t_s;
      const double g = d(rng);
      if (std::abs(dt) >= half) continue;
      x[s] = tr.amplitude * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * dt / tr.width_s)) * g;
    }
    TruthComponent comp;
    comp.id = "transient" + std::to_string(i);
    comp.cls = ComponentClass::kTransient;
    comp.t_start_s = std::max(0.0, tr.t_s - half);
    comp.t_end_s = std::min(spec.duration_s, tr.t_s + half);
    comp.f_lo_hz = axes.freq_hz.size() > 1 ? axes.freq_hz[1] : 0.0;
    comp.f_hi_hz = axes.freq_hz.empty() ? 0.0 : axes.freq_hz.back();
    comp.measured_energy = Energy(x, fs);
    double best = INFINITY;
    const double reach = half + window_s / 4.0;
    for (std::size_t t = 0; t < axes.frames(); ++t) {
      const double dt = std::abs(FrameCenterS(axes, t) - tr.t_s);
      if (dt < best) {
        best = dt;
        comp.peak_frame = t;
      }
      if (dt > reach) continue;
      for (std::size_t b = 1; b < bins; ++b) comp.support.push_back(t * bins + b);
    }
    truth.components.push_back(std::move(comp));
    for (std::size_t s = 0; s < n; ++s) shared[s] += x[s];
  }

  std::vector<ChannelSeries> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    ChannelSeries& cs = out[c];
    cs.samples = std::move(chans[c]);
    for (std::size_t s = 0; s < n; ++s) cs.samples[s] += shared[s];
    cs.sample_rate_hz = fs;
    cs.t0_ms = 0.0;
    cs.channel_id = "ch" + std::to_string(c);
    cs.shot_id = spec.shot_id;
    cs.extra = {{"synthetic", true}, {"seed", spec.seed}};
  }
  return {std::move(out), std::move(truth)};
}

DetectionScore ScoreDetection(const GroundTruth& truth, const std::vector<RegionRecord>& regions,
                              const SpectrogramAxes& axes, std::size_t guard_bins) {
  if (!axes.SameGrid(truth.axes)) throw Error(ErrorCode::kAxisMismatch, "score: region grid differs from truth grid");
  const std::size_t bins = axes.bins();
  const std::size_t size = bins * axes.frames();
  auto in_band = [&](std::size_t i) { return i % bins >= guard_bins; };

  auto dilate = [&](const std::vector<std::uint8_t>& m) {
    std::vector<std::uint8_t> d(m);
    for (std::size_t i = 0; i < size; ++i) {
      if (!m[i]) continue;
      const std::size_t f = i % bins;
      if (f > 0) d[i - 1] = 1;
      if (f + 1 < bins) d[i + 1] = 1;
    }
    return d;
  };
  auto score = [&](const std::vector<std::uint8_t>& det, const std::vector<std::uint8_t>& tru) {
    const auto det_d = dilate(det);
    const auto tru_d = dilate(tru);
    ClassScore s;
    std::size_t hit_truth = 0, hit_det = 0;
    for (std::size_t i = 0; i < size; ++i) {
      if (!in_band(i)) continue;
      if (tru[i]) {
        ++s.truth_pixels;
        if (det_d[i]) ++hit_truth;
      }
      if (det[i]) {
        ++s.predicted_pixels;
        if (tru_d[i]) ++hit_det;
      }
    }
    s.recall = s.truth_pixels ? static_cast<double>(hit_truth) / static_cast<double>(s.truth_pixels) : 1.0;
    s.precision_undefined = s.predicted_pixels == 0;
    s.precision = s.predicted_pixels ? static_cast<double>(hit_det) / static_cast<double>(s.predicted_pixels) : 1.0;
    s.f1 = s.recall + s.precision > 0.0 ? 2.0 * s.recall * s.precision / (s.recall + s.precision) : 0.0;
    return s;
  };

  std::vector<std::uint8_t> det_coh(size, 0), det_tr(size, 0), det_all(size, 0);
  for (const auto& r : regions) {
    auto& dst = r.kind == RegionKind::kTransient ? det_tr : det_coh;
    auto mark = [&](std::size_t i) {
      if (i >= size) throw Error(ErrorCode::kAxisMismatch, "score: region pixel outside grid");
      dst[i] = 1;
      det_all[i] = 1;
    };
    if (!r.pixels.empty()) {
      for (std::size_t i : r.pixels) mark(i);
    } else {
      for (std::size_t t = r.t_lo; t <= r.t_hi; ++t) {
        for (std::size_t f = r.f_lo; f <= r.f_hi; ++f) mark(t * bins + f);
      }
    }
  }
  std::vector<std::uint8_t> tru_coh(size, 0), tru_tr(size, 0), tru_all(size, 0);
  DetectionScore out;
  for (const auto& c : truth.components) {
    auto& dst = c.cls == ComponentClass::kTransient ? tru_tr : tru_coh;
    std::vector<std::uint8_t> own(size, 0);
    for (std::size_t i : c.support) {
      if (i >= size) throw Error(ErrorCode::kAxisMismatch, "score: truth pixel outside grid");
      dst[i] = 1;
      tru_all[i] = 1;
      own[i] = 1;
    }
    out.component_recall[c.id] = score(c.cls == ComponentClass::kTransient ? det_tr : det_coh, own).recall;
  }
  out.classes["coherent"] = score(det_coh, tru_coh);
  out.classes["transient"] = score(det_tr, tru_tr);
  out.classes["all"] = score(det_all, tru_all);
  return out;
}

nlohmann::json ToJson(const DetectionScore& score) {
  nlohmann::json j;
  for (const auto& [name, s] : score.classes) {
    j["classes"][name] = {{"recall", s.recall},
                          {"precision", s.precision},
                          {"f1", s.f1},
                          {"truth_pixels", s.truth_pixels},
                          {"predicted_pixels", s.predicted_pixels},
                          {"precision_undefined", s.precision_undefined}};
  }
  j["component_recall"] = score.component_recall;
  return j;
}

}  // namespace modex
