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

#ifndef BCAUTH_SIGNAL_STATS_H_
#define BCAUTH_SIGNAL_STATS_H_

#include <span>

namespace bcauth::signal {

// Pearson correlation of two equal-length sequences (length >= 2). A
// zero-variance argument yields 0 rather than an error.
double Pearson(std::span<const double> x, std::span<const double> y);

// Cosine similarity. Zero vectors yield 0.
double Cosine(std::span<const double> a, std::span<const double> b);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_STATS_H_
