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

#ifndef BCAUTH_SIGNAL_FFT_H_
#define BCAUTH_SIGNAL_FFT_H_

#include <complex>
#include <cstddef>
#include <span>

namespace bcauth::signal {

std::size_t NextPowerOfTwo(std::size_t n);

// Real-input FFT of a fixed length backed by FFTW. Plans are created under a
// process-wide lock (the FFTW planner is not reentrant); execution is
// reentrant, so one instance may be used per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // in.size() == size(), out.size() == bins(). Unnormalized.
  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;
  // in.size() == bins(), out.size() == size(). Scaled by 1/n so that
  // Inverse(Forward(x)) == x.
  void Inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_FFT_H_
