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

#ifndef BCAUTH_SIGNAL_SPECTROGRAM_H_
#define BCAUTH_SIGNAL_SPECTROGRAM_H_

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcauth/signal/waveform.h"

namespace bcauth::signal {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class WindowFunction { kHann, kHamming, kRectangular };

const char* WindowFunctionName(WindowFunction w);
WindowFunction ParseWindowFunction(const std::string& name);

// Periodic taper of the given length.
std::vector<double> MakeWindow(WindowFunction kind, std::size_t length);

struct FrameSpec {
  double window_ms = 5.0;
  double hop_ms = 4.0;  // window minus overlap
  WindowFunction window = WindowFunction::kHann;

  static FrameSpec FromOverlap(double window_ms, double overlap_ms,
                               WindowFunction window = WindowFunction::kHann);

  std::size_t WindowSamples(int sample_rate) const;
  std::size_t HopSamples(int sample_rate) const;
  void Validate(int sample_rate) const;
};

enum class FrequencyScale { kLinear, kLog };

// magnitudes(bin, frame). Bin frequencies are strictly increasing.
struct Spectrogram {
  RowMatrix magnitudes;
  std::vector<double> bin_frequencies;
  std::vector<double> frame_times;
  FrequencyScale scale = FrequencyScale::kLinear;

  std::size_t bins() const { return static_cast<std::size_t>(magnitudes.rows()); }
  std::size_t frames() const { return static_cast<std::size_t>(magnitudes.cols()); }
};

// Magnitude STFT. Frames start at sample 0 and advance by the hop; the frame
// count is floor((len - window) / hop) + 1. fft_size 0 selects the next power
// of two >= the window length.
Spectrogram Stft(const Waveform& w, const FrameSpec& spec,
                 std::size_t fft_size = 0);

struct CqtParams {
  int bins_per_octave = 48;
  double f_min = 32.7;  // C1
  double f_max = 2000.0;
  double hop_ms = 10.0;

  // Bins are f_min * 2^(k / bins_per_octave) for every k with f_k <= f_max,
  // i.e. floor(bins_per_octave * log2(f_max / f_min)) + 1 bins.
  std::size_t NumBins() const;
  double QFactor() const;
};

// Constant-Q transform with precomputed kernels. Each bin uses a Hann-windowed
// complex exponential of length Q * rate / f_k, evaluated on a copy of the
// input decimated by the largest power of two that keeps f_k below 0.35x the
// reduced rate. A unit-amplitude tone at a bin center reads 0.5 in that bin.
class ConstantQ {
 public:
  ConstantQ(int sample_rate, const CqtParams& params);

  const CqtParams& params() const { return params_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t NumFrames(std::size_t num_samples) const;

  Spectrogram Transform(const Waveform& w) const;

 private:
  struct Kernel {
    int level;
    std::vector<std::complex<double>> taps;
  };

  int sample_rate_;
  CqtParams params_;
  int num_levels_ = 1;
  std::vector<double> frequencies_;
  std::vector<Kernel> kernels_;
};

Spectrogram Cqt(const Waveform& w, int bins_per_octave, double f_min,
                double f_max, double hop_ms = 10.0);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_SPECTROGRAM_H_
