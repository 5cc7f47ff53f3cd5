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

#ifndef MODEX_IIR_HPP_
#define MODEX_IIR_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace modex::iir {

// One second-order section in transposed direct form II. a0 is 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using Sos = std::vector<Biquad>;

// Digital Chebyshev Type I low-pass of even `order`. `cutoff` is the
// passband edge as a fraction of Nyquist, in (0, 1). The passband ripple
// band is [1, 10^(ripple_db/20)] with unity gain at DC.
Sos DesignChebyshev1Lowpass(int order, double ripple_db, double cutoff);

// Response at normalized angular frequency omega in [0, pi].
std::complex<double> FrequencyResponse(const Sos& sos, double omega);

// Steady-state initial conditions for a unit step, two values per section.
std::vector<double> SosInitialState(const Sos& sos);

// Causal filtering. `state` holds two values per section and is updated.
void SosFilterInPlace(const Sos& sos, std::span<double> x,
                      std::span<double> state);

std::vector<double> SosFilter(const Sos& sos, std::span<const double> x);

// Zero-phase forward-backward filtering with odd-symmetric extension of
// `pad` samples at both ends and steady-state initial conditions.
// Requires x.size() > pad.
std::vector<double> FiltFilt(const Sos& sos, std::span<const double> x,
                             std::size_t pad);

}  // namespace modex::iir

#endif  // MODEX_IIR_HPP_
