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

#ifndef BCAUTH_TESTS_TEST_UTIL_H_
#define BCAUTH_TESTS_TEST_UTIL_H_

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "bcauth/signal/waveform.h"

namespace bcauth::testing {

inline signal::Waveform Sine(double freq, double amp, double seconds, int rate,
                             double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate + phase);
  }
  return signal::Waveform(std::move(x), rate);
}

inline signal::Waveform WhiteNoise(std::size_t n, double sigma, int rate,
                                   unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return signal::Waveform(std::move(x), rate);
}

inline signal::Waveform Add(const signal::Waveform& a, const signal::Waveform& b) {
  std::vector<double> x(a.samples().begin(), a.samples().end());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += b[i];
  return signal::Waveform(std::move(x), a.sample_rate());
}

// RMS of the samples in [skip, size - skip).
inline double InteriorRms(std::span<const double> x, std::size_t skip) {
  double e = 0.0;
  std::size_t n = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i, ++n) e += x[i] * x[i];
  return n == 0 ? 0.0 : std::sqrt(e / n);
}

// Welch-style averaged power spectrum by direct DFT over Hann-windowed,
// non-overlapping segments. Bin k sits at k * rate / seg.
inline std::vector<double> AveragedPowerSpectrum(std::span<const double> x,
                                                 std::size_t seg = 256) {
  std::vector<double> p(seg / 2 + 1, 0.0);
  std::vector<double> w(seg);
  for (std::size_t i = 0; i < seg; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / seg);
  }
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += seg, ++count) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        const double a = 2.0 * std::numbers::pi * k * i / seg;
        re += w[i] * x[start + i] * std::cos(a);
        im -= w[i] * x[start + i] * std::sin(a);
      }
      p[k] += re * re + im * im;
    }
  }
  for (double& v : p) v /= count == 0 ? 1.0 : static_cast<double>(count);
  return p;
}

// Fraction of spectral power in [lo, hi) Hz.
inline double BandFraction(const std::vector<double>& psd, int rate, double lo,
                           double hi) {
  const double df = rate / (2.0 * (psd.size() - 1));
  double in = 0.0, total = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    total += psd[k];
    if (k * df >= lo && k * df < hi) in += psd[k];
  }
  return total == 0.0 ? 0.0 : in / total;
}

}  // namespace bcauth::testing

#endif  // BCAUTH_TESTS_TEST_UTIL_H_
