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

#ifndef MODEX_SRC_FFT_HPP_
#define MODEX_SRC_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

namespace modex::detail {

// Real <-> half-complex transform of one length backed by FFTW. Each
// instance owns its buffers and plan, so distinct instances may run on
// different threads; only plan construction is serialized.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // Unnormalized forward DFT of `in` (size n) into `out` (size n/2 + 1).
  void Forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse; the caller divides by n.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace modex::detail

#endif  // MODEX_SRC_FFT_HPP_
