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

#include "bcauth/synth/vocal.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bcauth/error.h"
#include "bcauth/signal/filters.h"

namespace bcauth::synth {
namespace {

constexpr double kPi = std::numbers::pi;

struct Vowel {
  double f1_scale;
  double f2_scale;
};

// Relative F1/F2 placements of a few vowels around the speaker's neutral
// vocal tract.
constexpr Vowel kVowels[] = {{1.25, 0.85}, {0.60, 1.30}, {0.65, 0.65},
                             {0.90, 1.15}, {0.95, 0.70}, {1.00, 1.00}};

// Two-pole resonator with unit gain at DC.
class Resonator {
 public:
  void Set(double center_hz, double bandwidth_hz, double rate) {
    const double r = std::exp(-kPi * bandwidth_hz / rate);
    const double theta = 2.0 * kPi * center_hz / rate;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    b0_ = 1.0 - a1_ - a2_;
  }
  double Step(double x) {
    const double y = b0_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0.0, a2_ = 0.0, b0_ = 1.0, y1_ = 0.0, y2_ = 0.0;
};

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Segment {
  std::size_t begin;
  std::size_t end;
  bool voiced;
  bool fricative;
};

std::vector<Segment> Schedule(std::size_t n, double rate, std::mt19937_64& rng) {
  std::vector<Segment> segs;
  const auto samples = [rate](double s) {
    return static_cast<std::size_t>(std::lround(s * rate));
  };
  std::size_t pos = samples(Uniform(rng, 0.10, 0.30));
  const std::size_t stop = n > samples(0.15) ? n - samples(0.15) : 0;
  while (pos < stop) {
    const std::size_t syl = samples(Uniform(rng, 0.12, 0.35));
    const std::size_t end = std::min(stop, pos + syl);
    if (end > pos + samples(0.05)) segs.push_back({pos, end, true, false});
    pos = end;
    const std::size_t gap = samples(Uniform(rng, 0.05, 0.20));
    const bool fricative = Uniform(rng, 0.0, 1.0) < 0.5;
    const std::size_t gend = std::min(stop, pos + gap);
    if (fricative && gend > pos) segs.push_back({pos, gend, false, true});
    pos = gend;
  }
  return segs;
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void BcChannel::Validate() const {
  Require(lowpass_cutoff > 0.0 && lowpass_cutoff <= 2000.0,
          "bc channel: cutoff must be in (0, 2000] Hz");
  Require(static_cast<int>(attenuation_profile.size()) == kBcBands,
          "bc channel: attenuation profile needs one gain per band");
  for (double g : attenuation_profile) {
    Require(g > 0.0 && g <= 1.0, "bc channel: gains must be in (0, 1]");
  }
  Require(nonlinearity_coeff >= 0.0, "bc channel: nonlinearity must be >= 0");
}

void VocalModel::Validate() const {
  Require(pitch_f0 >= 60.0 && pitch_f0 <= 400.0,
          "vocal model: pitch must be in [60, 400] Hz");
  for (const Formant& f : formants) {
    Require(f.center_hz > 0.0 && f.center_hz < 4000.0,
            "vocal model: formant centres must be below 4 kHz");
    Require(f.bandwidth_hz > 0.0, "vocal model: formant bandwidth must be positive");
  }
  bc_channel.Validate();
}

VocalModel RandomVocalModel(const std::string& speaker_id, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VocalModel m;
  m.speaker_id = speaker_id;
  m.pitch_f0 = Uniform(rng, 90.0, 240.0);
  m.formants = {{Uniform(rng, 350, 750), Uniform(rng, 60, 120)},
                {Uniform(rng, 1000, 2000), Uniform(rng, 80, 160)},
                {Uniform(rng, 2300, 3000), Uniform(rng, 120, 200)},
                {Uniform(rng, 3300, 3800), Uniform(rng, 150, 250)}};
  BcChannel& c = m.bc_channel;
  c.lowpass_cutoff = Uniform(rng, 1000.0, 1900.0);
  const double slope = Uniform(rng, 0.5, 1.3);
  for (int b = 0; b < kBcBands; ++b) {
    const double centre = (b + 0.5) * kBcBandTop / kBcBands;
    c.attenuation_profile[b] =
        std::exp(-slope * centre / 1000.0) * Uniform(rng, 0.45, 1.0);
  }
  c.nonlinearity_coeff = Uniform(rng, 0.05, 0.4);
  return m;
}

signal::Waveform SynthUtterance(const VocalModel& model, double duration_s,
                                std::uint64_t seed, int sample_rate) {
  Require(duration_s > 0.0, "synth: duration must be positive");
  Require(duration_s >= 1.0 && duration_s <= 30.0,
          "synth: duration must be in [1, 30] s");
  model.Validate();
  const double rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(duration_s * rate));
  std::mt19937_64 rng(seed);
  const std::vector<Segment> segs = Schedule(n, rate, rng);

  std::vector<double> voiced(n, 0.0), fric(n, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Resonator formant_filters[4];
  double g1 = 0.0, g2 = 0.0, prev = 0.0;
  double phase = 0.0;
  const auto ramp_len = static_cast<std::size_t>(0.025 * rate);

  for (const Segment& s : segs) {
    const std::size_t len = s.end - s.begin;
    if (s.fricative) {
      double last = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double w = gauss(rng);
        fric[s.begin + i] = w - last;
        last = w;
      }
      continue;
    }
    const double f0 = model.pitch_f0 * (1.0 + Uniform(rng, -0.12, 0.12));
    const Vowel& v = kVowels[std::uniform_int_distribution<int>(0, 5)(rng)];
    for (std::size_t k = 0; k < model.formants.size() && k < 4; ++k) {
      double centre = model.formants[k].center_hz;
      if (k == 0) centre *= v.f1_scale;
      if (k == 1) centre *= v.f2_scale;
      if (k >= 2) centre *= 1.0 + Uniform(rng, -0.03, 0.03);
      centre = std::min(centre, 0.45 * rate);
      formant_filters[k].Set(centre, model.formants[k].bandwidth_hz, rate);
    }
    const double amp = Uniform(rng, 0.6, 1.0);
    double jitter = 1.0;
    double pulse_amp = 1.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      const double f = f0 * jitter * (1.0 + 0.06 * std::sin(kPi * u) - 0.04 * u);
      phase += f / rate;
      double e = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        e = pulse_amp;
        jitter = 1.0 + 0.01 * gauss(rng);
        pulse_amp = 1.0 + 0.05 * gauss(rng);
      }
      // Glottal pulse shaping (two real poles) and lip radiation.
      g1 = 0.92 * g1 + e;
      g2 = 0.92 * g2 + g1;
      double y = g2 - prev;
      prev = g2;
      for (std::size_t k = 0; k < model.formants.size() && k < 4; ++k) {
        y = formant_filters[k].Step(y);
      }
      double env = amp;
      if (i < ramp_len) env *= 0.5 - 0.5 * std::cos(kPi * i / ramp_len);
      if (len - i <= ramp_len) env *= 0.5 - 0.5 * std::cos(kPi * (len - i) / ramp_len);
      voiced[s.begin + i] = env * y;
    }
  }

  double voiced_energy = 0.0;
  std::size_t voiced_count = 0;
  for (const Segment& s : segs) {
    if (!s.voiced) continue;
    for (std::size_t i = s.begin; i < s.end; ++i) voiced_energy += voiced[i] * voiced[i];
    voiced_count += s.end - s.begin;
  }
  double fric_energy = 0.0;
  std::size_t fric_count = 0;
  for (const Segment& s : segs) {
    if (!s.fricative) continue;
    for (std::size_t i = s.begin; i < s.end; ++i) fric_energy += fric[i] * fric[i];
    fric_count += s.end - s.begin;
  }
  const double voiced_rms =
      voiced_count ? std::sqrt(voiced_energy / voiced_count) : 0.0;
  const double fric_rms = fric_count ? std::sqrt(fric_energy / fric_count) : 0.0;
  const double fric_gain = fric_rms > 0.0 ? 0.08 * voiced_rms / fric_rms : 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = voiced[i] + fric_gain * fric[i];
  const double peak = signal::PeakAbs(out);
  if (peak > 0.0) {
    for (double& x : out) x *= 0.5 / peak;
  }
  return signal::Waveform(std::move(out), sample_rate);
}

signal::Waveform ApplyBcChannel(const signal::Waveform& clear,
                                const BcChannel& channel) {
  channel.Validate();
  const int rate = clear.sample_rate();
  const std::span<const double> x = clear.samples();
  double mean_sq = 0.0;
  for (double v : x) mean_sq += v * v;
  if (!x.empty()) mean_sq /= static_cast<double>(x.size());
  std::vector<double> driven(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    driven[i] = x[i] + channel.nonlinearity_coeff * (x[i] * x[i] - mean_sq);
  }

  const double fall = std::max(0.0, channel.lowpass_cutoff - 200.0);
  std::vector<double> hz{0.0};
  std::vector<double> gain{channel.attenuation_profile.front()};
  const auto band_gain = [&](double f) {
    const double pos = f / (kBcBandTop / kBcBands) - 0.5;
    if (pos <= 0.0) return channel.attenuation_profile.front();
    if (pos >= kBcBands - 1) return channel.attenuation_profile.back();
    const auto b = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(b);
    return (1.0 - t) * channel.attenuation_profile[b] +
           t * channel.attenuation_profile[b + 1];
  };
  for (int b = 0; b < kBcBands; ++b) {
    const double centre = (b + 0.5) * kBcBandTop / kBcBands;
    if (centre >= fall) break;
    hz.push_back(centre);
    gain.push_back(channel.attenuation_profile[b]);
  }
  if (fall > hz.back()) {
    hz.push_back(fall);
    gain.push_back(band_gain(fall));
  }
  hz.push_back(channel.lowpass_cutoff);
  gain.push_back(0.0);
  hz.push_back(0.5 * rate);
  gain.push_back(0.0);
  const int taps = static_cast<int>(255.0 * rate / 8000.0) | 1;
  const std::vector<double> fir = signal::DesignFirFromResponse(hz, gain, rate, taps);
  return signal::Waveform(signal::ConvolveSame(driven, fir), rate);
}

void to_json(nlohmann::json& j, const Formant& f) {
  j = {{"center_hz", f.center_hz}, {"bandwidth_hz", f.bandwidth_hz}};
}
void from_json(const nlohmann::json& j, Formant& f) {
  f.center_hz = j.at("center_hz").get<double>();
  f.bandwidth_hz = j.at("bandwidth_hz").get<double>();
}
void to_json(nlohmann::json& j, const BcChannel& c) {
  j = {{"lowpass_cutoff", c.lowpass_cutoff},
       {"attenuation_profile", c.attenuation_profile},
       {"nonlinearity_coeff", c.nonlinearity_coeff}};
}
void from_json(const nlohmann::json& j, BcChannel& c) {
  c.lowpass_cutoff = j.at("lowpass_cutoff").get<double>();
  c.attenuation_profile = j.at("attenuation_profile").get<std::vector<double>>();
  c.nonlinearity_coeff = j.at("nonlinearity_coeff").get<double>();
}
void to_json(nlohmann::json& j, const VocalModel& m) {
  j = {{"speaker_id", m.speaker_id},
       {"pitch_f0", m.pitch_f0},
       {"formants", m.formants},
       {"bc_channel", m.bc_channel}};
}
void from_json(const nlohmann::json& j, VocalModel& m) {
  m.speaker_id = j.at("speaker_id").get<std::string>();
  m.pitch_f0 = j.at("pitch_f0").get<double>();
  m.formants = j.at("formants").get<std::vector<Formant>>();
  m.bc_channel = j.at("bc_channel").get<BcChannel>();
}

}  // namespace bcauth::synth
