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

#ifndef BCAUTH_KERNELS_CONV2D_H_
#define BCAUTH_KERNELS_CONV2D_H_

#include <cstddef>

namespace bcauth::kernels {

// Square-kernel 2-D convolution (cross-correlation), NCHW layout. Weights are
// [out_channels][in_channels][kernel][kernel].
struct Conv2dShape {
  int in_channels = 1;
  int out_channels = 1;
  int in_h = 1;
  int in_w = 1;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  std::size_t in_size() const {
    return static_cast<std::size_t>(in_channels) * in_h * in_w;
  }
  std::size_t out_size() const {
    return static_cast<std::size_t>(out_channels) * out_h() * out_w();
  }
  std::size_t weight_size() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
  }
  void Validate() const;
};

// Serial direct loops over one sample. Kept as the reference the batched
// kernels are tested and benchmarked against.
template <typename T>
void Conv2dForwardReference(const Conv2dShape& s, const T* in, const T* weight,
                            const T* bias, T* out);

// Writes d_in; accumulates into d_weight and d_bias.
template <typename T>
void Conv2dBackwardReference(const Conv2dShape& s, const T* in, const T* weight,
                             const T* d_out, T* d_in, T* d_weight, T* d_bias);

// Batched im2col + GEMM, OpenMP-parallel across samples. in and out hold
// batch consecutive samples.
template <typename T>
void Conv2dForward(const Conv2dShape& s, int batch, const T* in, const T* weight,
                   const T* bias, T* out);

// d_in may be null when the input gradient is not needed. Weight and bias
// gradients are summed over samples in sample order, so the result does not
// depend on the thread count.
template <typename T>
void Conv2dBackward(const Conv2dShape& s, int batch, const T* in, const T* weight,
                    const T* d_out, T* d_in, T* d_weight, T* d_bias);

}  // namespace bcauth::kernels

#endif  // BCAUTH_KERNELS_CONV2D_H_
