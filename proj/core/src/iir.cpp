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

#include "modex/iir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "modex/error.hpp"

namespace modex::iir {
namespace {

using cd = std::complex<double>;

// Bilinear transform with fs = 2 (so the warped analog edge for a digital
// edge w, as a fraction of Nyquist, is 4 tan(pi w / 2)).
constexpr double kTwoFs = 4.0;

double Prewarp(double w) { return kTwoFs * std::tan(std::numbers::pi * w / 2.0); }

cd Bilinear(cd s) { return (kTwoFs + s) / (kTwoFs - s); }

// Builds sections from upper-half-plane digital poles (one per section) and
// a shared numerator.
Sos SectionsFromPoles(const std::vector<cd>& poles, const Biquad& numerator) {
  Sos sos;
  sos.reserve(poles.size());
  for (const cd& p : poles) {
    Biquad q = numerator;
    q.a1 = -2.0 * p.real();
    q.a2 = std::norm(p);
    sos.push_back(q);
  }
  return sos;
}

void ScaleToUnitGain(Sos& sos, double omega) {
  const double g = std::abs(FrequencyResponse(sos, omega));
  const double s = 1.0 / g;
  sos.front().b0 *= s;
  sos.front().b1 *= s;
  sos.front().b2 *= s;
}

}  // namespace

Sos DesignChebyshev1Lowpass(int order, double ripple_db, double cutoff) {
  if (order < 2 || order % 2 != 0) {
    throw Error(ErrorCode::kInvalidConfig, "Chebyshev order must be even and >= 2");
  }
  if (!(ripple_db > 0.0) || !(cutoff > 0.0 && cutoff < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "Chebyshev ripple must be > 0 and cutoff in (0, 1)");
  }
  const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / order;
  const double warped = Prewarp(cutoff);

  std::vector<cd> poles;
  for (int k = 0; k < order / 2; ++k) {
    // Upper-half-plane prototype poles only; conjugates are implied.
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const cd analog(-std::sinh(mu) * std::sin(theta), std::cosh(mu) * std::cos(theta));
    poles.push_back(Bilinear(analog * warped));
  }
  Sos sos = SectionsFromPoles(poles, Biquad{1.0, 2.0, 1.0, 0.0, 0.0});
  ScaleToUnitGain(sos, 0.0);
  return sos;
}

std::complex<double> FrequencyResponse(const Sos& sos, double omega) {
  const cd z1 = std::polar(1.0, -omega);
  const cd z2 = z1 * z1;
  cd h(1.0, 0.0);
  for (const Biquad& q : sos) {
    h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  }
  return h;
}

std::vector<double> SosInitialState(const Sos& sos) {
  std::vector<double> zi(2 * sos.size());
  double level = 1.0;  // DC level entering the current section
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    zi[2 * s] = level * (gain - q.b0);
    zi[2 * s + 1] = level * (q.b2 - q.a2 * gain);
    level *= gain;
  }
  return zi;
}

void SosFilterInPlace(const Sos& sos, std::span<double> x, std::span<double> state) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad q = sos[s];
    double z1 = state[2 * s];
    double z2 = state[2 * s + 1];
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    state[2 * s] = z1;
    state[2 * s + 1] = z2;
  }
}

std::vector<double> SosFilter(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> state(2 * sos.size(), 0.0);
  SosFilterInPlace(sos, y, state);
  return y;
}

std::vector<double> FiltFilt(const Sos& sos, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n <= pad) {
    throw Error(ErrorCode::kSeriesTooShort, "forward-backward filter needs more samples than the edge extension");
  }
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[n + pad + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  const std::vector<double> zi = SosInitialState(sos);
  std::vector<double> state(zi.size());

  for (std::size_t i = 0; i < zi.size(); ++i) state[i] = zi[i] * ext.front();
  SosFilterInPlace(sos, ext, state);

  std::reverse(ext.begin(), ext.end());
  for (std::size_t i = 0; i < zi.size(); ++i) state[i] = zi[i] * ext.front();
  SosFilterInPlace(sos, ext, state);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace modex::iir
