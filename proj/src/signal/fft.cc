// Copyright (c) 2026 The bcauth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bcauth/signal/fft.h"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "bcauth/error.h"

namespace bcauth::signal {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  Require(n >= 2, "fft size must be >= 2");
  // Plans are made for unaligned scratch arrays so that execution on caller
  // buffers through the new-array interface is valid.
  std::vector<double> real(n_ + 1);
  std::vector<std::complex<double>> cplx(bins() + 1);
  double* r = real.data() + 1;
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data() + 1);
  std::lock_guard<std::mutex> lock(PlannerMutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), r, c, flags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), c, r,
                                       flags | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  Require(in.size() == n_ && out.size() == bins(), "fft: buffer size");
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  Require(in.size() == bins() && out.size() == n_, "ifft: buffer size");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

}  // namespace bcauth::signal
