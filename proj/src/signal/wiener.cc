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

#include "bcauth/signal/wiener.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bcauth/error.h"
#include "bcauth/signal/fft.h"

namespace bcauth::signal {
namespace {

std::vector<double> SqrtHann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                          static_cast<double>(i) /
                                          static_cast<double>(n)));
  }
  return w;
}

std::vector<double> NoisePsd(std::span<const double> noise,
                             const std::vector<double>& window,
                             const RealFft& fft) {
  const std::size_t n = window.size();
  std::vector<double> tiled(noise.begin(), noise.end());
  while (tiled.size() < n) {
    tiled.insert(tiled.end(), noise.begin(), noise.end());
  }
  const std::size_t hop = n / 2;
  const std::size_t frames = (tiled.size() - n) / hop + 1;
  std::vector<double> psd(fft.bins(), 0.0);
  std::vector<double> buf(n);
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = tiled[t * hop + i] * window[i];
    fft.Forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) psd[k] += std::norm(spec[k]);
  }
  for (double& p : psd) p /= static_cast<double>(frames);
  return psd;
}

}  // namespace

Waveform WienerDenoise(const Waveform& w, const Waveform& noise_profile,
                       const WienerOptions& options) {
  Require(w.sample_rate() == noise_profile.sample_rate(),
          "wiener: noise profile sample rate differs from signal");
  Require(!noise_profile.empty(), "wiener: empty noise profile");
  Require(options.frame_length >= 4 && options.frame_length % 2 == 0,
          "wiener: frame length must be even and >= 4");
  Require(options.smoothing >= 0.0 && options.smoothing < 1.0,
          "wiener: smoothing must be in [0, 1)");
  if (w.empty()) return w;

  const std::size_t n = options.frame_length;
  const std::size_t hop = n / 2;
  const std::vector<double> window = SqrtHann(n);
  RealFft fft(n);
  const std::vector<double> noise_psd =
      NoisePsd(noise_profile.samples(), window, fft);

  const std::size_t len = w.size();
  const std::size_t frames = (len + hop + hop - 1) / hop;
  std::vector<double> padded((frames + 1) * hop, 0.0);
  std::copy(w.samples().begin(), w.samples().end(), padded.begin() + hop);
  std::vector<double> out(padded.size(), 0.0);

  std::vector<double> buf(n);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> prev_clean(fft.bins(), 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) buf[i] = padded[start + i] * window[i];
    fft.Forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double lambda = noise_psd[k];
      if (lambda <= 0.0) continue;
      const double power = std::norm(spec[k]);
      const double gamma = power / lambda;
      const double ml = std::max(gamma - 1.0, 0.0);
      const double xi = t == 0 ? ml
                               : options.smoothing * prev_clean[k] / lambda +
                                     (1.0 - options.smoothing) * ml;
      const double gain = std::max(xi / (1.0 + xi), options.gain_floor);
      spec[k] *= gain;
      prev_clean[k] = gain * gain * power;
    }
    fft.Inverse(spec, buf);
    for (std::size_t i = 0; i < n; ++i) out[start + i] += buf[i] * window[i];
  }
  return Waveform(std::vector<double>(out.begin() + hop, out.begin() + hop + len),
                  w.sample_rate());
}

Waveform EstimateNoiseProfile(const Waveform& w, double fraction,
                              std::size_t frame_length) {
  Require(fraction > 0.0 && fraction <= 1.0,
          "noise profile: fraction must be in (0, 1]");
  Require(frame_length >= 1, "noise profile: frame length must be positive");
  if (w.size() < 2 * frame_length) return w;
  const std::size_t frames = w.size() / frame_length;
  std::vector<double> energy(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    energy[t] = Energy(w.samples().subspan(t * frame_length, frame_length));
  }
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(fraction * frames)));
  const double cut = sorted[keep - 1];
  std::vector<double> profile;
  std::size_t taken = 0;
  for (std::size_t t = 0; t < frames && taken < keep; ++t) {
    if (energy[t] > cut) continue;
    auto seg = w.samples().subspan(t * frame_length, frame_length);
    profile.insert(profile.end(), seg.begin(), seg.end());
    ++taken;
  }
  return Waveform(std::move(profile), w.sample_rate());
}

}  // namespace bcauth::signal
