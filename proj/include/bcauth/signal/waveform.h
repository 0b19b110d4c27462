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

#ifndef BCAUTH_SIGNAL_WAVEFORM_H_
#define BCAUTH_SIGNAL_WAVEFORM_H_

#include <cstddef>
#include <span>
#include <vector>

namespace bcauth::signal {

// A sampled mono signal. Samples are finite and the sample rate is positive;
// both are checked on construction.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int sample_rate);

  static Waveform Zeros(std::size_t length, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  std::vector<double>& mutable_samples() { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  double operator[](std::size_t i) const { return samples_[i]; }

  // Peak-normalized copy (max |x| == 1); an all-zero signal is returned as is.
  Waveform Normalized() const;
  Waveform Scaled(double gain) const;
  // Samples [begin, begin + length), clamped to the signal end.
  Waveform Slice(std::size_t begin, std::size_t length) const;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

double Rms(std::span<const double> x);
double Energy(std::span<const double> x);
double PeakAbs(std::span<const double> x);

// Signal-to-noise ratio of `observed` against its known clean component.
double SnrDb(std::span<const double> clean, std::span<const double> observed);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_WAVEFORM_H_
