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

#include "modex/baseline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "modex/error.hpp"
#include "modex/parallel.hpp"
#include "modex/tfa.hpp"

namespace modex {
namespace {

// 10^(-v/20) = exp(-v * ln(10) / 20).
constexpr double kDbToNeper = 0.11512925464970229;

void ExpectModelGrid(const Spectrogram& spec, const BaselineModel& model, std::string_view op) {
  if (spec.bins() != model.bins || spec.frames() != model.frames) {
    throw Error(ErrorCode::kDimMismatch, std::string(op) + ": baseline model does not match spectrogram");
  }
}

// Number of slices solved together. Interleaving independent slices hides
// the latency of the banded recurrences.
constexpr std::size_t kLanes = 4;

// Banded LDL' solver for (W + lambda D'D) v = W y on kLanes systems at once.
// Arrays are index-major: element (i, lane) lives at i * kLanes + lane.
class AslsSolver {
 public:
  AslsSolver(std::size_t n, double lambda) : n_(n) {
    penalty_diag_.assign(n, 0.0);
    penalty_off1_.assign(n, 0.0);
    penalty_off2_.assign(n, 0.0);
    // Accumulate D'D row by row of D = [1 -2 1].
    const double c[3] = {1.0, -2.0, 1.0};
    for (std::size_t r = 0; r + 2 < n; ++r) {
      for (int a = 0; a < 3; ++a) {
        penalty_diag_[r + a] += lambda * c[a] * c[a];
        if (a < 2) penalty_off1_[r + a] += lambda * c[a] * c[a + 1];
      }
      penalty_off2_[r] += lambda * c[0] * c[2];
    }
    diag_.assign(n * kLanes, 0.0);
    inv_.assign(n * kLanes, 0.0);
    l1_.assign(n * kLanes, 0.0);
    l2_.assign(n * kLanes, 0.0);
    work_.assign(n * kLanes, 0.0);
  }

  // Solves in place: rhs holds W y on entry and v on exit.
  void Solve(const std::vector<double>& w, std::vector<double>& rhs) {
    const std::size_t n = n_;
    constexpr std::size_t L = kLanes;
    for (std::size_t i = 0; i < n; ++i) {
      double* d = &diag_[i * L];
      double* inv = &inv_[i * L];
      double* l1 = &l1_[i * L];
      double* l2 = &l2_[i * L];
      for (std::size_t l = 0; l < L; ++l) {
        d[l] = w[i * L + l] + penalty_diag_[i];
        l1[l] = 0.0;
        l2[l] = 0.0;
      }
      if (i >= 2) {
        const double* d2 = &diag_[(i - 2) * L];
        const double* inv2 = &inv_[(i - 2) * L];
        const double* l1p = &l1_[(i - 1) * L];
        const double* inv1 = &inv_[(i - 1) * L];
        for (std::size_t l = 0; l < L; ++l) {
          l2[l] = penalty_off2_[i - 2] * inv2[l];
          d[l] -= l2[l] * penalty_off2_[i - 2];
          const double a = penalty_off1_[i - 1] - l2[l] * d2[l] * l1p[l];
          l1[l] = a * inv1[l];
          d[l] -= l1[l] * a;
        }
      } else if (i == 1) {
        for (std::size_t l = 0; l < L; ++l) {
          l1[l] = penalty_off1_[0] * inv_[l];
          d[l] -= l1[l] * penalty_off1_[0];
        }
      }
      bool ok = true;
      for (std::size_t l = 0; l < L; ++l) {
        ok &= d[l] > 0.0;
        inv[l] = 1.0 / d[l];
      }
      if (!ok) throw Error(ErrorCode::kSingularSystem, "baseline system is not positive definite");
    }
    // Forward substitution.
    std::copy_n(rhs.begin(), L, work_.begin());
    for (std::size_t l = 0; l < L && n > 1; ++l) work_[L + l] = rhs[L + l] - l1_[L + l] * work_[l];
    for (std::size_t i = 2; i < n; ++i) {
      const double* r = &rhs[i * L];
      const double* a = &l1_[i * L];
      const double* b = &l2_[i * L];
      const double* w1 = &work_[(i - 1) * L];
      const double* w2 = &work_[(i - 2) * L];
      double* z = &work_[i * L];
      for (std::size_t l = 0; l < L; ++l) z[l] = r[l] - a[l] * w1[l] - b[l] * w2[l];
    }
    // Back substitution.
    for (std::size_t l = 0; l < L; ++l) rhs[(n - 1) * L + l] = work_[(n - 1) * L + l] * inv_[(n - 1) * L + l];
    if (n > 1) {
      for (std::size_t l = 0; l < L; ++l) {
        rhs[(n - 2) * L + l] = work_[(n - 2) * L + l] * inv_[(n - 2) * L + l] - l1_[(n - 1) * L + l] * rhs[(n - 1) * L + l];
      }
    }
    for (std::size_t i = n - 2; i-- > 0;) {
      const double* w = &work_[i * L];
      const double* iv = &inv_[i * L];
      const double* a = &l1_[(i + 1) * L];
      const double* b = &l2_[(i + 2) * L];
      const double* x1 = &rhs[(i + 1) * L];
      const double* x2 = &rhs[(i + 2) * L];
      double* x = &rhs[i * L];
      for (std::size_t l = 0; l < L; ++l) x[l] = w[l] * iv[l] - a[l] * x1[l] - b[l] * x2[l];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> penalty_diag_, penalty_off1_, penalty_off2_;
  std::vector<double> diag_, inv_, l1_, l2_, work_;
};

struct LaneResult {
  int iters = 0;
  bool converged = false;
};

// Fits up to kLanes columns. The least-squares line is removed first: it
// lies in the null space of D, so fit(y) = line + fit(y - line) exactly, and
// the remaining system is better scaled. A lane stops updating once its
// weights settle; unused lanes mirror lane 0.
class SliceFitter {
 public:
  SliceFitter(std::size_t n, const BaselineConfig& cfg)
      : n_(n),
        cfg_(cfg),
        solver_(n, cfg.lambda),
        detrended_(n * kLanes),
        weights_(n * kLanes),
        v_(n * kLanes),
        above_(n * kLanes) {}

  void Fit(std::span<const std::span<const double>> ys, std::span<const std::span<double>> outs,
           std::span<LaneResult> results) {
    const std::size_t n = n_;
    constexpr std::size_t L = kLanes;
    const double nk = static_cast<double>(n);
    const double kmean = (nk - 1.0) / 2.0;
    std::array<double, L> ymean{}, slope{};
    for (std::size_t l = 0; l < L; ++l) {
      const auto y = ys[l < ys.size() ? l : 0];
      double m = 0.0;
      for (double v : y) m += v;
      m /= nk;
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double dk = static_cast<double>(k) - kmean;
        sxy += dk * (y[k] - m);
        sxx += dk * dk;
      }
      ymean[l] = m;
      slope[l] = sxy / sxx;
      for (std::size_t k = 0; k < n; ++k) {
        detrended_[k * L + l] = y[k] - (m + slope[l] * (static_cast<double>(k) - kmean));
      }
    }

    std::fill(weights_.begin(), weights_.end(), 1.0);
    std::array<bool, L> active{}, have_previous{};
    std::array<LaneResult, L> res{};
    active.fill(true);
    for (int iter = 0; iter < cfg_.max_iters; ++iter) {
      for (std::size_t i = 0; i < n * L; ++i) v_[i] = weights_[i] * detrended_[i];
      solver_.Solve(weights_, v_);
      bool any = false;
      for (std::size_t l = 0; l < L; ++l) {
        if (!active[l]) continue;
        ++res[l].iters;
        std::size_t flips = 0;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t i = k * L + l;
          const std::uint8_t a = detrended_[i] > v_[i] ? 1 : 0;
          if (have_previous[l] && a != above_[i]) ++flips;
          above_[i] = a;
        }
        if (have_previous[l] && static_cast<double>(flips) / nk < cfg_.weight_tol) {
          res[l].converged = true;
          active[l] = false;
          Emit(l, ymean[l], slope[l], kmean, outs, ys.size());
          continue;
        }
        have_previous[l] = true;
        any = true;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t i = k * L + l;
          weights_[i] = above_[i] ? cfg_.p : 1.0 - cfg_.p;
        }
      }
      if (!any) break;
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (active[l]) Emit(l, ymean[l], slope[l], kmean, outs, ys.size());
      if (l < results.size()) results[l] = res[l];
    }
  }

 private:
  void Emit(std::size_t l, double ymean, double slope, double kmean, std::span<const std::span<double>> outs,
            std::size_t used) {
    if (l >= used) return;
    auto out = outs[l];
    for (std::size_t k = 0; k < n_; ++k) {
      out[k] = v_[k * kLanes + l] + ymean + slope * (static_cast<double>(k) - kmean);
    }
  }

  std::size_t n_;
  BaselineConfig cfg_;
  AslsSolver solver_;
  std::vector<double> detrended_, weights_, v_;
  std::vector<std::uint8_t> above_;
};

void CheckFinite(std::span<const double> y) {
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "baseline input contains non-finite values");
  }
}

std::vector<double> EmphasisTerm(const SpectrogramAxes& axes, double alpha) {
  std::vector<double> term(axes.bins(), 0.0);
  double ref = 0.0;
  for (double f : axes.freq_hz) {
    if (f > 0.0) {
      ref = f;
      break;
    }
  }
  if (alpha == 0.0 || ref == 0.0) return term;
  for (std::size_t k = 0; k < term.size(); ++k) {
    if (axes.freq_hz[k] > 0.0) term[k] = 10.0 * alpha * std::log10(axes.freq_hz[k] / ref);
  }
  return term;
}

}  // namespace

void BaselineConfig::Validate() const {
  if (!(p > 0.0 && p < 0.5)) throw Error(ErrorCode::kInvalidConfig, "baseline p must be in (0, 0.5)");
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidConfig, "baseline lambda must be positive");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "baseline alpha must be >= 0");
  if (max_iters < 1) throw Error(ErrorCode::kInvalidConfig, "baseline max_iters must be >= 1");
  if (!(weight_tol >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "baseline weight_tol must be >= 0");
  if (!(guard_hz >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "guard band must be >= 0 Hz");
}

SliceFit FitBaselineSlice(std::span<const double> column, const BaselineConfig& cfg) {
  cfg.Validate();
  if (column.size() < 8) throw Error(ErrorCode::kDimMismatch, "baseline column needs at least 8 bins");
  CheckFinite(column);
  SliceFit fit;
  fit.baseline.resize(column.size());
  SliceFitter fitter(column.size(), cfg);
  const std::span<const double> ys[1] = {column};
  const std::span<double> outs[1] = {fit.baseline};
  LaneResult r[1];
  fitter.Fit(ys, outs, r);
  fit.iters = r[0].iters;
  fit.converged = r[0].converged;
  return fit;
}

Spectrogram PreEmphasize(const Spectrogram& log_power, double alpha) {
  log_power.ExpectKind({SpectrogramKind::kLogPower}, "pre_emphasize");
  Spectrogram out = log_power;
  const std::vector<double> term = EmphasisTerm(log_power.axes(), alpha);
  for (std::size_t t = 0; t < out.frames(); ++t) {
    auto col = out.frame(t);
    for (std::size_t f = 0; f < col.size(); ++f) col[f] += term[f];
  }
  return out;
}

double RobustScale(std::span<const double> values) {
  if (values.empty()) return kMinResidualScale;
  std::vector<double> v(values.begin(), values.end());
  auto median_of = [](std::vector<double>& x) {
    const std::size_t m = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), x.end());
    double med = x[m];
    if (x.size() % 2 == 0) {
      med = 0.5 * (med + *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m)));
    }
    return med;
  };
  const double med = median_of(v);
  for (double& x : v) x = std::abs(x - med);
  return std::max(1.4826 * median_of(v), kMinResidualScale);
}

BaselineModel EstimateBaseline(const Spectrogram& log_power, const BaselineConfig& cfg, int threads) {
  log_power.ExpectKind({SpectrogramKind::kLogPower}, "estimate_baseline");
  cfg.Validate();
  if (log_power.frames() == 0) throw Error(ErrorCode::kDimMismatch, "estimate_baseline needs at least one frame");
  const std::size_t bins = log_power.bins();
  const std::size_t first = cfg.exclude_dc ? 1 : 0;
  if (bins - first < 8) throw Error(ErrorCode::kDimMismatch, "baseline column needs at least 8 bins");
  CheckFinite(log_power.values());

  const std::vector<double> term = EmphasisTerm(log_power.axes(), cfg.alpha);
  BaselineModel model;
  model.bins = bins;
  model.frames = log_power.frames();
  model.baseline.assign(bins * model.frames, 0.0);
  model.residual_scale.assign(model.frames, kMinResidualScale);
  model.iters_used.assign(model.frames, 0);
  model.converged.assign(model.frames, 0);

  ParallelChunks(model.frames, threads, [&](std::size_t begin, std::size_t end) {
    const std::size_t n = bins - first;
    SliceFitter fitter(n, cfg);
    std::vector<double> y(n * kLanes), v(n * kLanes), resid(n);
    for (std::size_t t0 = begin; t0 < end; t0 += kLanes) {
      const std::size_t lanes = std::min(kLanes, end - t0);
      std::array<std::span<const double>, kLanes> ys;
      std::array<std::span<double>, kLanes> outs;
      std::array<LaneResult, kLanes> res;
      for (std::size_t l = 0; l < lanes; ++l) {
        auto col = log_power.frame(t0 + l);
        double* yl = y.data() + l * n;
        for (std::size_t k = 0; k < n; ++k) yl[k] = col[first + k] + term[first + k];
        ys[l] = {yl, n};
        outs[l] = {v.data() + l * n, n};
      }
      fitter.Fit(std::span(ys.data(), lanes), std::span(outs.data(), lanes), std::span(res.data(), lanes));
      for (std::size_t l = 0; l < lanes; ++l) {
        const std::size_t t = t0 + l;
        auto col = log_power.frame(t);
        model.iters_used[t] = res[l].iters;
        model.converged[t] = res[l].converged ? 1 : 0;
        double* out = model.baseline.data() + t * bins;
        if (first == 1) out[0] = col[0];
        for (std::size_t k = 0; k < n; ++k) {
          out[first + k] = outs[l][k] - term[first + k];
          resid[k] = col[first + k] - out[first + k];
        }
        model.residual_scale[t] = RobustScale(resid);
      }
    }
  });
  return model;
}

std::size_t GuardBins(const SpectrogramAxes& axes, double guard_hz) {
  std::size_t n = 0;
  while (n < axes.bins() && axes.freq_hz[n] < guard_hz) ++n;
  return std::max<std::size_t>(n, 1);
}

Spectrogram Whiten(const Spectrogram& log_power, const BaselineModel& model, double guard_hz) {
  log_power.ExpectKind({SpectrogramKind::kLogPower}, "whiten");
  ExpectModelGrid(log_power, model, "whiten");
  Spectrogram out = log_power.Like(SpectrogramKind::kWhitened);
  out.set_guard_bins(GuardBins(log_power.axes(), guard_hz));
  for (std::size_t t = 0; t < out.frames(); ++t) {
    auto p = log_power.frame(t);
    auto v = model.frame(t);
    auto w = out.frame(t);
    const double inv = 1.0 / model.residual_scale[t];
    for (std::size_t f = 0; f < w.size(); ++f) w[f] = (p[f] - v[f]) * inv;
  }
  return out;
}

Spectrogram WhitenComplex(const Spectrogram& spec, const BaselineModel& model) {
  spec.ExpectKind({SpectrogramKind::kComplex}, "whiten_complex");
  ExpectModelGrid(spec, model, "whiten_complex");
  Spectrogram out = spec.Like(SpectrogramKind::kComplex);
  for (std::size_t t = 0; t < out.frames(); ++t) {
    auto z = spec.cframe(t);
    auto v = model.frame(t);
    auto o = out.cframe(t);
    for (std::size_t f = 0; f < o.size(); ++f) o[f] = z[f] * std::exp(-v[f] * kDbToNeper);
  }
  return out;
}

Spectrogram StandardizeWhitenedComplex(const Spectrogram& whitened_complex,
                                       const BaselineModel& model, double guard_hz) {
  whitened_complex.ExpectKind({SpectrogramKind::kComplex}, "standardize");
  ExpectModelGrid(whitened_complex, model, "standardize");
  Spectrogram out = whitened_complex.Like(SpectrogramKind::kWhitened);
  out.set_guard_bins(GuardBins(whitened_complex.axes(), guard_hz));
  for (std::size_t t = 0; t < out.frames(); ++t) {
    auto z = whitened_complex.cframe(t);
    auto w = out.frame(t);
    const double inv = 1.0 / model.residual_scale[t];
    for (std::size_t f = 0; f < w.size(); ++f) w[f] = 10.0 * std::log10(std::norm(z[f]) + kPowerFloor) * inv;
  }
  return out;
}

Spectrogram BroadbandExcess(const BaselineModel& model, const SpectrogramAxes& axes, double guard_hz,
                            std::size_t window_frames) {
  if (axes.bins() != model.bins || axes.frames() != model.frames) {
    throw Error(ErrorCode::kDimMismatch, "broadband_excess: baseline model does not match axes");
  }
  if (window_frames < 2) throw Error(ErrorCode::kInvalidConfig, "broadband_excess window must be >= 2 frames");
  Spectrogram out(SpectrogramKind::kWhitened, axes);
  out.set_guard_bins(GuardBins(axes, guard_hz));
  const std::size_t bins = model.bins;
  const std::size_t frames = model.frames;
  // Short trailing windows are merged into the previous one.
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < frames; s += window_frames) starts.push_back(s);
  if (starts.size() > 1 && frames - starts.back() < window_frames / 2) starts.pop_back();
  std::vector<double> block, scratch;
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t begin = starts[w];
    const std::size_t len = (w + 1 < starts.size() ? starts[w + 1] : frames) - begin;
    // Transpose the window so each bin's history is contiguous.
    block.resize(bins * len);
    for (std::size_t t = 0; t < len; ++t) {
      auto col = model.frame(begin + t);
      for (std::size_t f = 0; f < bins; ++f) block[f * len + t] = col[f];
    }
    for (std::size_t f = 0; f < bins; ++f) {
      const std::span<double> v(block.data() + f * len, len);
      scratch.assign(v.begin(), v.end());
      const std::size_t m = len / 2;
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(m), scratch.end());
      const double level = scratch[m];
      const double inv = 1.0 / RobustScale(v);
      for (double& x : v) x = (x - level) * inv;
    }
    for (std::size_t t = 0; t < len; ++t) {
      auto col = out.frame(begin + t);
      for (std::size_t f = 0; f < bins; ++f) col[f] = block[f * len + t];
    }
  }
  return out;
}

Container ToContainer(const BaselineModel& model, const SpectrogramAxes& axes) {
  if (axes.bins() != model.bins || axes.frames() != model.frames) {
    throw Error(ErrorCode::kDimMismatch, "baseline model does not match axes");
  }
  Container c;
  c.kind = SpectrogramKind::kLogPower;
  c.axes = axes;
  c.planes["values"] = MatrixPlane(model.baseline, model.bins, model.frames);
  c.planes["residual_scale"] = VectorPlane(model.residual_scale);
  c.planes["iters_used"] = VectorPlane({model.iters_used.begin(), model.iters_used.end()});
  c.planes["converged"] = VectorPlane({model.converged.begin(), model.converged.end()});
  return c;
}

BaselineModel BaselineModelFromContainer(const Container& c) {
  for (const char* name : {"values", "residual_scale", "iters_used", "converged"}) {
    if (!c.planes.contains(name)) {
      throw Error(ErrorCode::kIoError, std::string("baseline container lacks plane '") + name + "'");
    }
  }
  BaselineModel m;
  m.bins = c.axes.bins();
  m.frames = c.axes.frames();
  m.baseline = FrameMajor(c.planes.at("values"), m.bins, m.frames);
  m.residual_scale = c.planes.at("residual_scale").real;
  for (double v : c.planes.at("iters_used").real) m.iters_used.push_back(static_cast<int>(v));
  for (double v : c.planes.at("converged").real) m.converged.push_back(v != 0.0 ? 1 : 0);
  if (m.residual_scale.size() != m.frames) throw Error(ErrorCode::kIoError, "baseline container is malformed");
  return m;
}

}  // namespace modex
