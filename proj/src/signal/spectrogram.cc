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

#include "bcauth/signal/spectrogram.h"

#include <cmath>
#include <numbers>

#include "bcauth/error.h"
#include "bcauth/signal/fft.h"
#include "bcauth/signal/resample.h"

namespace bcauth::signal {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

const char* WindowFunctionName(WindowFunction w) {
  switch (w) {
    case WindowFunction::kHann: return "hann";
    case WindowFunction::kHamming: return "hamming";
    case WindowFunction::kRectangular: return "rectangular";
  }
  return "unknown";
}

WindowFunction ParseWindowFunction(const std::string& name) {
  if (name == "hann") return WindowFunction::kHann;
  if (name == "hamming") return WindowFunction::kHamming;
  if (name == "rectangular") return WindowFunction::kRectangular;
  throw Error(ErrorKind::kInvalidArgument, "unknown window function: " + name);
}

std::vector<double> MakeWindow(WindowFunction kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  const double n = static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double phase = 2.0 * kPi * static_cast<double>(i) / n;
    switch (kind) {
      case WindowFunction::kHann: w[i] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowFunction::kHamming: w[i] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowFunction::kRectangular: break;
    }
  }
  return w;
}

FrameSpec FrameSpec::FromOverlap(double window_ms, double overlap_ms,
                                 WindowFunction window) {
  return {window_ms, window_ms - overlap_ms, window};
}

std::size_t FrameSpec::WindowSamples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(window_ms * sample_rate / 1000.0));
}

std::size_t FrameSpec::HopSamples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FrameSpec::Validate(int sample_rate) const {
  Require(window_ms > 0.0, "frame: window must be positive");
  Require(hop_ms > 0.0 && hop_ms <= window_ms,
          "frame: hop must satisfy 0 < hop <= window");
  Require(WindowSamples(sample_rate) >= 1 && HopSamples(sample_rate) >= 1,
          "frame: window and hop must span at least one sample");
}

Spectrogram Stft(const Waveform& w, const FrameSpec& spec,
                 std::size_t fft_size) {
  spec.Validate(w.sample_rate());
  const std::size_t win = spec.WindowSamples(w.sample_rate());
  const std::size_t hop = spec.HopSamples(w.sample_rate());
  Require(w.size() >= win, "stft: signal shorter than one window");
  if (fft_size == 0) fft_size = NextPowerOfTwo(win);
  Require(fft_size >= win && fft_size >= 2, "stft: fft size below window");

  const std::size_t frames = (w.size() - win) / hop + 1;
  const std::vector<double> taper = MakeWindow(spec.window, win);
  RealFft fft(fft_size);
  Spectrogram out;
  out.scale = FrequencyScale::kLinear;
  out.magnitudes.resize(static_cast<Eigen::Index>(fft.bins()),
                        static_cast<Eigen::Index>(frames));
  out.bin_frequencies.resize(fft.bins());
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    out.bin_frequencies[k] =
        static_cast<double>(k) * w.sample_rate() / static_cast<double>(fft_size);
  }
  out.frame_times.resize(frames);

  std::vector<double> buf(fft_size);
  std::vector<std::complex<double>> spec_buf(fft.bins());
  const std::span<const double> x = w.samples();
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) buf[i] = x[start + i] * taper[i];
    fft.Forward(buf, spec_buf);
    for (std::size_t k = 0; k < fft.bins(); ++k) {
      out.magnitudes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          std::abs(spec_buf[k]);
    }
    out.frame_times[t] =
        (static_cast<double>(start) + 0.5 * static_cast<double>(win)) /
        w.sample_rate();
  }
  return out;
}

std::size_t CqtParams::NumBins() const {
  return static_cast<std::size_t>(
             std::floor(bins_per_octave * std::log2(f_max / f_min) + 1e-9)) +
         1;
}

double CqtParams::QFactor() const {
  return 1.0 / (std::exp2(1.0 / bins_per_octave) - 1.0);
}

ConstantQ::ConstantQ(int sample_rate, const CqtParams& params)
    : sample_rate_(sample_rate), params_(params) {
  Require(sample_rate > 0, "cqt: sample rate must be positive");
  Require(params.bins_per_octave >= 1, "cqt: bins_per_octave must be >= 1");
  Require(params.f_min > 0.0 && params.f_min < params.f_max,
          "cqt: need 0 < f_min < f_max");
  Require(params.f_max <= 0.5 * sample_rate, "cqt: f_max exceeds Nyquist");
  Require(params.hop_ms > 0.0, "cqt: hop must be positive");

  const std::size_t n = params.NumBins();
  const double q = params.QFactor();
  frequencies_.resize(n);
  kernels_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = params.f_min *
                     std::exp2(static_cast<double>(k) / params.bins_per_octave);
    frequencies_[k] = f;
    int level = 0;
    while (sample_rate % (1 << (level + 1)) == 0 &&
           f <= 0.35 * sample_rate / static_cast<double>(1 << (level + 1))) {
      ++level;
    }
    const double rate = sample_rate / static_cast<double>(1 << level);
    std::size_t len = static_cast<std::size_t>(std::ceil(q * rate / f)) | 1;
    std::vector<std::complex<double>> taps(len);
    const double centre = 0.5 * static_cast<double>(len - 1);
    double wsum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double win =
          0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i + 1) /
                               static_cast<double>(len + 1));
      wsum += win;
      taps[i] = std::polar(win, -2.0 * kPi * f * (static_cast<double>(i) - centre) / rate);
    }
    for (auto& t : taps) t /= wsum;
    kernels_[k] = {level, std::move(taps)};
    num_levels_ = std::max(num_levels_, level + 1);
  }
}

std::size_t ConstantQ::NumFrames(std::size_t num_samples) const {
  if (num_samples == 0) return 0;
  const double hop = params_.hop_ms * sample_rate_ / 1000.0;
  return static_cast<std::size_t>(
             std::floor(static_cast<double>(num_samples - 1) / hop + 1e-9)) +
         1;
}

Spectrogram ConstantQ::Transform(const Waveform& w) const {
  Require(w.sample_rate() == sample_rate_, "cqt: sample rate mismatch");
  Require(!w.empty(), "cqt: empty input");
  std::vector<Waveform> levels;
  levels.push_back(w);
  for (int d = 1; d < num_levels_; ++d) {
    levels.push_back(Resample(levels.back(), levels.back().sample_rate() / 2));
  }

  const std::size_t frames = NumFrames(w.size());
  const std::size_t bins = frequencies_.size();
  Spectrogram out;
  out.scale = FrequencyScale::kLog;
  out.bin_frequencies = frequencies_;
  out.frame_times.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    out.frame_times[t] = static_cast<double>(t) * params_.hop_ms / 1000.0;
  }
  out.magnitudes.resize(static_cast<Eigen::Index>(bins),
                        static_cast<Eigen::Index>(frames));

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t k = 0; k < bins; ++k) {
    const Kernel& kernel = kernels_[k];
    const Waveform& lw = levels[static_cast<std::size_t>(kernel.level)];
    const std::span<const double> x = lw.samples();
    const long long len = static_cast<long long>(x.size());
    const long long taps = static_cast<long long>(kernel.taps.size());
    const long long half = taps / 2;
    for (std::size_t t = 0; t < frames; ++t) {
      const long long centre =
          std::llround(out.frame_times[t] * lw.sample_rate());
      const long long start = centre - half;
      const long long i0 = std::max(0LL, -start);
      const long long i1 = std::min(taps, len - start);
      double re = 0.0, im = 0.0;
      for (long long i = i0; i < i1; ++i) {
        const double v = x[static_cast<std::size_t>(start + i)];
        re += v * kernel.taps[static_cast<std::size_t>(i)].real();
        im += v * kernel.taps[static_cast<std::size_t>(i)].imag();
      }
      out.magnitudes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          std::sqrt(re * re + im * im);
    }
  }
  return out;
}

Spectrogram Cqt(const Waveform& w, int bins_per_octave, double f_min,
                double f_max, double hop_ms) {
  return ConstantQ(w.sample_rate(), {bins_per_octave, f_min, f_max, hop_ms})
      .Transform(w);
}

}  // namespace bcauth::signal
