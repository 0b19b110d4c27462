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

// Reference vs batched convolution at the shapes the speaker network uses.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bcauth/kernels/conv2d.h"

namespace {

using bcauth::kernels::Conv2dShape;

// Args: in_channels, out_channels, height, width, batch.
Conv2dShape ShapeOf(const benchmark::State& st) {
  Conv2dShape s;
  s.in_channels = static_cast<int>(st.range(0));
  s.out_channels = static_cast<int>(st.range(1));
  s.in_h = static_cast<int>(st.range(2));
  s.in_w = static_cast<int>(st.range(3));
  return s;
}

std::vector<float> Random(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> d;
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

struct Buffers {
  Buffers(const Conv2dShape& s, int batch)
      : in(Random(s.in_size() * batch, 1)),
        w(Random(s.weight_size(), 2)),
        b(Random(s.out_channels, 3)),
        out(s.out_size() * batch),
        d_out(Random(s.out_size() * batch, 4)),
        d_in(in.size()),
        d_w(w.size()),
        d_b(b.size()) {}
  std::vector<float> in, w, b, out, d_out, d_in, d_w, d_b;
};

void BM_ForwardReference(benchmark::State& st) {
  const Conv2dShape s = ShapeOf(st);
  const int batch = static_cast<int>(st.range(4));
  Buffers buf(s, batch);
  for (auto _ : st) {
    for (int n = 0; n < batch; ++n) {
      bcauth::kernels::Conv2dForwardReference(s, buf.in.data() + n * s.in_size(), buf.w.data(),
                                              buf.b.data(), buf.out.data() + n * s.out_size());
    }
    benchmark::DoNotOptimize(buf.out.data());
  }
  st.SetItemsProcessed(st.iterations() * batch);
}

void BM_ForwardBatched(benchmark::State& st) {
  const Conv2dShape s = ShapeOf(st);
  const int batch = static_cast<int>(st.range(4));
  Buffers buf(s, batch);
  for (auto _ : st) {
    bcauth::kernels::Conv2dForward(s, batch, buf.in.data(), buf.w.data(), buf.b.data(),
                                   buf.out.data());
    benchmark::DoNotOptimize(buf.out.data());
  }
  st.SetItemsProcessed(st.iterations() * batch);
}

void BM_BackwardReference(benchmark::State& st) {
  const Conv2dShape s = ShapeOf(st);
  const int batch = static_cast<int>(st.range(4));
  Buffers buf(s, batch);
  for (auto _ : st) {
    for (int n = 0; n < batch; ++n) {
      bcauth::kernels::Conv2dBackwardReference(
          s, buf.in.data() + n * s.in_size(), buf.w.data(), buf.d_out.data() + n * s.out_size(),
          buf.d_in.data() + n * s.in_size(), buf.d_w.data(), buf.d_b.data());
    }
    benchmark::DoNotOptimize(buf.d_w.data());
  }
  st.SetItemsProcessed(st.iterations() * batch);
}

void BM_BackwardBatched(benchmark::State& st) {
  const Conv2dShape s = ShapeOf(st);
  const int batch = static_cast<int>(st.range(4));
  Buffers buf(s, batch);
  for (auto _ : st) {
    bcauth::kernels::Conv2dBackward(s, batch, buf.in.data(), buf.w.data(), buf.d_out.data(),
                                    buf.d_in.data(), buf.d_w.data(), buf.d_b.data());
    benchmark::DoNotOptimize(buf.d_w.data());
  }
  st.SetItemsProcessed(st.iterations() * batch);
}

// Default network: stem on the pooled 71x100 input, then the second conv of
// blocks 2 and 3.
void Shapes(benchmark::internal::Benchmark* b) {
  b->Args({1, 16, 71, 100, 16})->Args({32, 32, 18, 25, 16})->Args({64, 64, 9, 13, 16});
  b->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_ForwardReference)->Apply(Shapes);
BENCHMARK(BM_ForwardBatched)->Apply(Shapes);
BENCHMARK(BM_BackwardReference)->Apply(Shapes);
BENCHMARK(BM_BackwardBatched)->Apply(Shapes);

}  // namespace

BENCHMARK_MAIN();
