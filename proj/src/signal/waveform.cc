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

#include "bcauth/signal/waveform.h"

#include <algorithm>
#include <cmath>

#include "bcauth/error.h"

namespace bcauth::signal {

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(sample_rate_ > 0, "sample rate must be positive");
  for (double s : samples_) {
    Require(std::isfinite(s), "waveform contains a non-finite sample");
  }
}

Waveform Waveform::Zeros(std::size_t length, int sample_rate) {
  return Waveform(std::vector<double>(length, 0.0), sample_rate);
}

Waveform Waveform::Normalized() const {
  const double peak = PeakAbs(samples_);
  if (peak == 0.0 || peak == 1.0) return *this;
  Waveform out = *this;
  for (double& s : out.samples_) s /= peak;
  return out;
}

Waveform Waveform::Scaled(double gain) const {
  Waveform out = *this;
  for (double& s : out.samples_) s *= gain;
  return out;
}

Waveform Waveform::Slice(std::size_t begin, std::size_t length) const {
  begin = std::min(begin, samples_.size());
  const std::size_t end = std::min(samples_.size(), begin + length);
  return Waveform(std::vector<double>(samples_.begin() + begin,
                                      samples_.begin() + end),
                  sample_rate_);
}

double Energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(Energy(x) / static_cast<double>(x.size()));
}

double PeakAbs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

double SnrDb(std::span<const double> clean, std::span<const double> observed) {
  Require(clean.size() == observed.size(), "SNR needs equal lengths");
  double noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = observed[i] - clean[i];
    noise += d * d;
  }
  const double signal = Energy(clean);
  if (noise == 0.0) return INFINITY;
  return 10.0 * std::log10(signal / noise);
}

}  // namespace bcauth::signal
