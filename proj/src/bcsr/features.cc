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

#include "bcauth/bcsr/features.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "bcauth/error.h"

namespace bcauth::bcsr {

void FeatureConfig::Validate() const {
  Require(sample_rate > 0, "feature: sample rate must be positive");
  Require(seconds > 0.0, "feature: segment length must be positive");
  Require(cqt.bins_per_octave > 0 && cqt.f_min > 0.0 && cqt.f_max > cqt.f_min &&
              cqt.hop_ms > 0.0,
          "feature: invalid CQT parameters");
  Require(cqt.f_max < 0.5 * sample_rate, "feature: CQT f_max must be below Nyquist");
}

std::size_t FeatureConfig::segment_samples() const {
  return static_cast<std::size_t>(std::lround(seconds * sample_rate));
}

void to_json(nlohmann::json& j, const FeatureConfig& c) {
  j = {{"sample_rate", c.sample_rate},
       {"seconds", c.seconds},
       {"bins_per_octave", c.cqt.bins_per_octave},
       {"f_min", c.cqt.f_min},
       {"f_max", c.cqt.f_max},
       {"hop_ms", c.cqt.hop_ms}};
}

void from_json(const nlohmann::json& j, FeatureConfig& c) {
  const FeatureConfig d;
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.seconds = j.value("seconds", d.seconds);
  c.cqt.bins_per_octave = j.value("bins_per_octave", d.cqt.bins_per_octave);
  c.cqt.f_min = j.value("f_min", d.cqt.f_min);
  c.cqt.f_max = j.value("f_max", d.cqt.f_max);
  c.cqt.hop_ms = j.value("hop_ms", d.cqt.hop_ms);
}

namespace {
const FeatureConfig& Validated(const FeatureConfig& c) {
  c.Validate();
  return c;
}
}  // namespace

FeatureExtractor::FeatureExtractor(const FeatureConfig& config)
    : config_(Validated(config)), cqt_(config.sample_rate, config.cqt) {
  freqs_.resize(config_.cqt.NumBins());
  for (std::size_t k = 0; k < freqs_.size(); ++k) {
    freqs_[k] = config_.cqt.f_min *
                std::pow(2.0, static_cast<double>(k) / config_.cqt.bins_per_octave);
  }
}

int FeatureExtractor::bins() const { return static_cast<int>(freqs_.size()); }

int FeatureExtractor::frames() const {
  return static_cast<int>(cqt_.NumFrames(config_.segment_samples()));
}

BcFeature FeatureExtractor::Extract(const signal::Waveform& bc,
                                    synth::Condition condition,
                                    std::optional<std::string> speaker) const {
  Require(bc.sample_rate() == config_.sample_rate,
          "feature: BC must be sampled at " + std::to_string(config_.sample_rate) + " Hz");
  const std::size_t len = config_.segment_samples();
  Require(bc.size() >= len, "feature: BC shorter than " +
                                std::to_string(config_.seconds) + " s");
  const std::size_t start = (bc.size() - len) / 2;
  const auto x = bc.samples().subspan(start, len);
  const signal::Spectrogram s =
      cqt_.Transform(signal::Waveform(std::vector<double>(x.begin(), x.end()),
                                      bc.sample_rate()));
  BcFeature f;
  f.bins = static_cast<int>(s.bins());
  f.frames = static_cast<int>(s.frames());
  f.condition = condition;
  f.speaker = std::move(speaker);
  f.values.assign(static_cast<std::size_t>(f.bins) * f.frames, 0.0f);
  const double mean = s.magnitudes.mean();
  if (!(mean > 0.0)) return f;
  for (int b = 0; b < f.bins; ++b) {
    for (int t = 0; t < f.frames; ++t) {
      f.values[static_cast<std::size_t>(b) * f.frames + t] =
          static_cast<float>(std::log1p(s.magnitudes(b, t) / mean));
    }
  }
  return f;
}

BcFeature Augment(const BcFeature& f, std::uint64_t seed, const AugmentConfig& c) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BcFeature out = f;
  const int t_n = f.frames;
  if (t_n == 0) return out;
  const auto row = [&](int b) { return out.values.data() + static_cast<std::size_t>(b) * t_n; };
  if (u(rng) < c.flip_probability) {
    for (int b = 0; b < f.bins; ++b) std::reverse(row(b), row(b) + t_n);
  }
  if (c.crop) {
    const int min_len = std::clamp(
        static_cast<int>(std::ceil(c.min_crop_fraction * t_n)), 1, t_n);
    const int len = min_len + static_cast<int>(rng() % (t_n - min_len + 1));
    const int start = static_cast<int>(rng() % (t_n - len + 1));
    for (int b = 0; b < f.bins; ++b) {
      std::fill(row(b), row(b) + start, 0.0f);
      std::fill(row(b) + start + len, row(b) + t_n, 0.0f);
    }
  }
  if (c.translate) {
    const int shift = static_cast<int>(rng() % t_n);
    for (int b = 0; b < f.bins; ++b) std::rotate(row(b), row(b) + shift, row(b) + t_n);
  }
  return out;
}

}  // namespace bcauth::bcsr
