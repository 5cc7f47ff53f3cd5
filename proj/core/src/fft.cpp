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

#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include "modex/error.hpp"

namespace modex::detail {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw Error(ErrorCode::kInvalidConfig, "FFT length must be at least 2");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(n);
  spec_ = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  // FFTW_ESTIMATE keeps plans (and therefore results) independent of timing.
  forward_ = fftw_plan_dft_r2c_1d(len, real_, spec_, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(len, spec_, real_, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(inverse_);
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::Forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n_), real_);
  fftw_execute(forward_);
  std::memcpy(static_cast<void*>(out.data()), spec_, bins() * sizeof(fftw_complex));
}

void RealFft::Inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::memcpy(spec_, in.data(), bins() * sizeof(fftw_complex));
  fftw_execute(inverse_);
  std::copy(real_, real_ + n_, out.begin());
}

}  // namespace modex::detail
