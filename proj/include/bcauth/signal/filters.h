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

#ifndef BCAUTH_SIGNAL_FILTERS_H_
#define BCAUTH_SIGNAL_FILTERS_H_

#include <span>
#include <string>
#include <vector>

#include "bcauth/signal/waveform.h"

namespace bcauth::signal {

enum class FilterKind { kLowpass, kHighpass, kBandpass, kWiener };

const char* FilterKindName(FilterKind kind);
FilterKind ParseFilterKind(const std::string& name);

struct FilterSpec {
  FilterKind kind = FilterKind::kHighpass;
  // One cutoff for low/highpass, two (low, high) for bandpass, none for wiener.
  std::vector<double> cutoffs;
  // FIR length (odd). 0 selects the shortest length that keeps the response
  // within 3 dB at the passband edges.
  int order = 0;

  static FilterSpec Highpass(double cutoff_hz, int order = 0);
  static FilterSpec Lowpass(double cutoff_hz, int order = 0);
  static FilterSpec Bandpass(double low_hz, double high_hz, int order = 0);
  static FilterSpec Wiener();

  void Validate(int sample_rate) const;
};

// Linear-phase FIR taps for a lowpass/highpass/bandpass spec. The spec's
// cutoffs are passband edges; the 6 dB points sit half a transition band
// inside the stopband.
std::vector<double> DesignFir(const FilterSpec& spec, int sample_rate);

// Windowed-sinc lowpass with its 6 dB point at cutoff_hz, unit DC gain.
std::vector<double> WindowedSincLowpass(double cutoff_hz, double sample_rate,
                                        int taps);

// Linear-phase FIR approximating an arbitrary magnitude response given at
// (frequency, gain) knots, linearly interpolated between knots.
std::vector<double> DesignFirFromResponse(std::span<const double> knot_hz,
                                          std::span<const double> knot_gain,
                                          int sample_rate, int taps);

// |H(f)| of an FIR.
double MagnitudeResponse(std::span<const double> taps, double freq_hz,
                         int sample_rate);

// Zero-phase ("same") convolution with an odd-length linear-phase kernel:
// output[i] is aligned with input[i]. The ends are extended by odd
// reflection, which passes constants and linear trends through unchanged.
std::vector<double> ConvolveSame(std::span<const double> x,
                                 std::span<const double> kernel);

// Filters with the FIR designed from spec; kind == kWiener runs
// WienerDenoise with a noise profile estimated from the quietest frames.
Waveform ApplyFilter(const Waveform& w, const FilterSpec& spec);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_FILTERS_H_
