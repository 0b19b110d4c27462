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

#include "bcauth/signal/filters.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "bcauth/error.h"
#include "bcauth/signal/fft.h"
#include "bcauth/signal/wiener.h"

namespace bcauth::signal {
namespace {

constexpr double kPi = std::numbers::pi;
// Hamming transition width is about kHammingWidth * fs / taps.
constexpr double kHammingWidth = 3.3;

int OddTaps(double taps) {
  int n = static_cast<int>(std::ceil(taps));
  if (n < 3) n = 3;
  return n | 1;
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double HammingAt(int n, int taps) {
  return 0.54 - 0.46 * std::cos(2.0 * kPi * n / (taps - 1));
}

// Transition width used when the FIR length is chosen automatically.
double AutoTransition(double edge_hz) {
  return std::min(edge_hz, std::max(0.2 * edge_hz, 20.0));
}

struct Edge {
  double design_cutoff;
  int taps;
};

// Highpass-side edge: passband starts at edge_hz.
Edge LowerEdge(double edge_hz, int fs, int order) {
  if (order > 0) return {edge_hz, OddTaps(order)};
  const double width = AutoTransition(edge_hz);
  return {edge_hz - 0.5 * width, OddTaps(kHammingWidth * fs / width)};
}

// Lowpass-side edge: passband ends at edge_hz.
Edge UpperEdge(double edge_hz, int fs, int order) {
  if (order > 0) return {edge_hz, OddTaps(order)};
  const double nyquist = 0.5 * fs;
  const double width = std::min(AutoTransition(edge_hz), nyquist - edge_hz);
  return {edge_hz + 0.5 * width, OddTaps(kHammingWidth * fs / width)};
}

std::vector<double> ConvolveDirect(std::span<const double> xp,
                                   std::span<const double> kernel,
                                   std::size_t out_len) {
  std::vector<double> y(out_len, 0.0);
  const std::size_t n = kernel.size();
  for (std::size_t i = 0; i < out_len; ++i) {
    double acc = 0.0;
    // y[i] = sum_j k[j] * xp[i + n - 1 - j]
    for (std::size_t j = 0; j < n; ++j) acc += kernel[j] * xp[i + n - 1 - j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> ConvolveFft(std::span<const double> xp,
                                std::span<const double> kernel,
                                std::size_t out_len) {
  const std::size_t full = xp.size() + kernel.size() - 1;
  const std::size_t n = NextPowerOfTwo(full);
  RealFft fft(n);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::copy(xp.begin(), xp.end(), a.begin());
  std::copy(kernel.begin(), kernel.end(), b.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.Forward(a, fa);
  fft.Forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.Inverse(fa, a);
  const std::size_t offset = kernel.size() - 1;
  return std::vector<double>(a.begin() + offset, a.begin() + offset + out_len);
}

}  // namespace

const char* FilterKindName(FilterKind kind) {
  switch (kind) {
    case FilterKind::kLowpass: return "lowpass";
    case FilterKind::kHighpass: return "highpass";
    case FilterKind::kBandpass: return "bandpass";
    case FilterKind::kWiener: return "wiener";
  }
  return "unknown";
}

FilterKind ParseFilterKind(const std::string& name) {
  if (name == "lowpass") return FilterKind::kLowpass;
  if (name == "highpass") return FilterKind::kHighpass;
  if (name == "bandpass") return FilterKind::kBandpass;
  if (name == "wiener") return FilterKind::kWiener;
  throw Error(ErrorKind::kInvalidArgument, "unknown filter kind: " + name);
}

FilterSpec FilterSpec::Highpass(double cutoff_hz, int order) {
  return {FilterKind::kHighpass, {cutoff_hz}, order};
}
FilterSpec FilterSpec::Lowpass(double cutoff_hz, int order) {
  return {FilterKind::kLowpass, {cutoff_hz}, order};
}
FilterSpec FilterSpec::Bandpass(double low_hz, double high_hz, int order) {
  return {FilterKind::kBandpass, {low_hz, high_hz}, order};
}
FilterSpec FilterSpec::Wiener() { return {FilterKind::kWiener, {}, 0}; }

void FilterSpec::Validate(int sample_rate) const {
  Require(sample_rate > 0, "filter: sample rate must be positive");
  Require(order >= 0, "filter: order must be non-negative");
  const double nyquist = 0.5 * sample_rate;
  switch (kind) {
    case FilterKind::kWiener:
      return;
    case FilterKind::kLowpass:
    case FilterKind::kHighpass:
      Require(cutoffs.size() == 1, "filter: expected exactly one cutoff");
      break;
    case FilterKind::kBandpass:
      Require(cutoffs.size() == 2, "filter: bandpass needs two cutoffs");
      Require(cutoffs[0] < cutoffs[1], "filter: bandpass needs low < high");
      break;
  }
  for (double c : cutoffs) {
    Require(c > 0.0, "filter: cutoff must be positive");
    Require(c < nyquist, "filter: cutoff must be below Nyquist");
  }
}

std::vector<double> WindowedSincLowpass(double cutoff_hz, double sample_rate,
                                        int taps) {
  taps = OddTaps(taps);
  const int mid = taps / 2;
  const double fc = cutoff_hz / sample_rate;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    h[n] = 2.0 * fc * Sinc(2.0 * fc * (n - mid)) * HammingAt(n, taps);
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> DesignFir(const FilterSpec& spec, int sample_rate) {
  spec.Validate(sample_rate);
  switch (spec.kind) {
    case FilterKind::kLowpass: {
      const Edge e = UpperEdge(spec.cutoffs[0], sample_rate, spec.order);
      return WindowedSincLowpass(e.design_cutoff, sample_rate, e.taps);
    }
    case FilterKind::kHighpass: {
      const Edge e = LowerEdge(spec.cutoffs[0], sample_rate, spec.order);
      std::vector<double> h =
          WindowedSincLowpass(e.design_cutoff, sample_rate, e.taps);
      for (double& v : h) v = -v;
      h[h.size() / 2] += 1.0;
      return h;
    }
    case FilterKind::kBandpass: {
      const Edge lo = LowerEdge(spec.cutoffs[0], sample_rate, spec.order);
      const Edge hi = UpperEdge(spec.cutoffs[1], sample_rate, spec.order);
      const int taps = std::max(lo.taps, hi.taps);
      std::vector<double> h =
          WindowedSincLowpass(hi.design_cutoff, sample_rate, taps);
      const std::vector<double> l =
          WindowedSincLowpass(lo.design_cutoff, sample_rate, taps);
      for (std::size_t i = 0; i < h.size(); ++i) h[i] -= l[i];
      return h;
    }
    case FilterKind::kWiener:
      break;
  }
  throw Error(ErrorKind::kInvalidArgument, "wiener filter has no FIR taps");
}

std::vector<double> DesignFirFromResponse(std::span<const double> knot_hz,
                                          std::span<const double> knot_gain,
                                          int sample_rate, int taps) {
  Require(knot_hz.size() == knot_gain.size() && knot_hz.size() >= 2,
          "response design needs >= 2 matching knots");
  for (std::size_t i = 1; i < knot_hz.size(); ++i) {
    Require(knot_hz[i] > knot_hz[i - 1], "response knots must increase");
  }
  taps = OddTaps(taps);
  const int mid = taps / 2;
  const std::size_t grid = NextPowerOfTwo(static_cast<std::size_t>(taps) * 8);
  const std::size_t half = grid / 2;
  std::vector<double> gain(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const double f = static_cast<double>(k) * sample_rate / grid;
    if (f <= knot_hz.front()) {
      gain[k] = knot_gain.front();
    } else if (f >= knot_hz.back()) {
      gain[k] = knot_gain.back();
    } else {
      const auto it = std::upper_bound(knot_hz.begin(), knot_hz.end(), f);
      const std::size_t j = static_cast<std::size_t>(it - knot_hz.begin());
      const double t = (f - knot_hz[j - 1]) / (knot_hz[j] - knot_hz[j - 1]);
      gain[k] = knot_gain[j - 1] + t * (knot_gain[j] - knot_gain[j - 1]);
    }
  }
  std::vector<double> h(taps);
  for (int n = 0; n < taps; ++n) {
    const double m = n - mid;
    double acc = gain[0] + gain[half] * std::cos(kPi * m);
    for (std::size_t k = 1; k < half; ++k) {
      acc += 2.0 * gain[k] * std::cos(2.0 * kPi * k * m / grid);
    }
    h[n] = acc / grid * HammingAt(n, taps);
  }
  return h;
}

double MagnitudeResponse(std::span<const double> taps, double freq_hz,
                         int sample_rate) {
  std::complex<double> acc = 0.0;
  const double w = 2.0 * kPi * freq_hz / sample_rate;
  for (std::size_t n = 0; n < taps.size(); ++n) {
    acc += taps[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(acc);
}

std::vector<double> ConvolveSame(std::span<const double> x,
                                 std::span<const double> kernel) {
  Require(kernel.size() % 2 == 1, "convolve: kernel length must be odd");
  if (x.empty()) return {};
  const std::size_t len = x.size();
  const std::size_t half = kernel.size() / 2;
  std::vector<double> xp(len + 2 * half);
  for (std::size_t k = 1; k <= half; ++k) {
    xp[half - k] = 2.0 * x[0] - x[std::min(k, len - 1)];
    xp[half + len - 1 + k] = 2.0 * x[len - 1] - x[len - 1 - std::min(k, len - 1)];
  }
  std::copy(x.begin(), x.end(), xp.begin() + half);
  if (kernel.size() <= 64) return ConvolveDirect(xp, kernel, len);
  return ConvolveFft(xp, kernel, len);
}

Waveform ApplyFilter(const Waveform& w, const FilterSpec& spec) {
  spec.Validate(w.sample_rate());
  if (spec.kind == FilterKind::kWiener) {
    return WienerDenoise(w, EstimateNoiseProfile(w));
  }
  const std::vector<double> taps = DesignFir(spec, w.sample_rate());
  return Waveform(ConvolveSame(w.samples(), taps), w.sample_rate());
}

}  // namespace bcauth::signal
