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

#include "bcauth/kernels/conv2d.h"

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "bcauth/error.h"

namespace bcauth::kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;

template <typename T>
void Im2Col(const Conv2dShape& s, const T* in, T* cols) {
  const int ho = s.out_h(), wo = s.out_w(), k = s.kernel;
  for (int c = 0; c < s.in_channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s.stride - s.pad + ky;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * s.stride - s.pad + kx;
            row[oy * wo + ox] = (iy >= 0 && iy < s.in_h && ix >= 0 && ix < s.in_w)
                                    ? in[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w + ix]
                                    : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const Conv2dShape& s, const T* cols, T* in) {
  const int ho = s.out_h(), wo = s.out_w(), k = s.kernel;
  std::fill(in, in + s.in_size(), T(0));
  for (int c = 0; c < s.in_channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s.stride - s.pad + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * s.stride - s.pad + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            in[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w + ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

void Conv2dShape::Validate() const {
  Require(in_channels > 0 && out_channels > 0 && in_h > 0 && in_w > 0 &&
              kernel > 0 && stride > 0 && pad >= 0,
          "conv2d: all dimensions must be positive");
  Require(out_h() > 0 && out_w() > 0, "conv2d: input smaller than the kernel");
}

template <typename T>
void Conv2dForwardReference(const Conv2dShape& s, const T* in, const T* weight,
                            const T* bias, T* out) {
  const int ho = s.out_h(), wo = s.out_w(), k = s.kernel;
  for (int o = 0; o < s.out_channels; ++o) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        T acc = bias ? bias[o] : T(0);
        for (int c = 0; c < s.in_channels; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += weight[((static_cast<std::size_t>(o) * s.in_channels + c) * k + ky) * k + kx] *
                     in[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w + ix];
            }
          }
        }
        out[(static_cast<std::size_t>(o) * ho + oy) * wo + ox] = acc;
      }
    }
  }
}

template <typename T>
void Conv2dBackwardReference(const Conv2dShape& s, const T* in, const T* weight,
                             const T* d_out, T* d_in, T* d_weight, T* d_bias) {
  const int ho = s.out_h(), wo = s.out_w(), k = s.kernel;
  if (d_in) std::fill(d_in, d_in + s.in_size(), T(0));
  for (int o = 0; o < s.out_channels; ++o) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        const T g = d_out[(static_cast<std::size_t>(o) * ho + oy) * wo + ox];
        if (d_bias) d_bias[o] += g;
        for (int c = 0; c < s.in_channels; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix < 0 || ix >= s.in_w) continue;
              const std::size_t wi =
                  ((static_cast<std::size_t>(o) * s.in_channels + c) * k + ky) * k + kx;
              const std::size_t ii = (static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w + ix;
              d_weight[wi] += g * in[ii];
              if (d_in) d_in[ii] += g * weight[wi];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void Conv2dForward(const Conv2dShape& s, int batch, const T* in, const T* weight,
                   const T* bias, T* out) {
  const int kk = s.in_channels * s.kernel * s.kernel;
  const int hw = s.out_h() * s.out_w();
  const ConstMap<T> w(weight, s.out_channels, kk);
#pragma omp parallel
  {
    std::vector<T> cols(static_cast<std::size_t>(kk) * hw);
#pragma omp for schedule(static)
    for (int b = 0; b < batch; ++b) {
      Im2Col(s, in + b * s.in_size(), cols.data());
      Map<T> y(out + b * s.out_size(), s.out_channels, hw);
      y.noalias() = w * ConstMap<T>(cols.data(), kk, hw);
      if (bias) {
        for (int o = 0; o < s.out_channels; ++o) y.row(o).array() += bias[o];
      }
    }
  }
}

template <typename T>
void Conv2dBackward(const Conv2dShape& s, int batch, const T* in, const T* weight,
                    const T* d_out, T* d_in, T* d_weight, T* d_bias) {
  const int kk = s.in_channels * s.kernel * s.kernel;
  const int hw = s.out_h() * s.out_w();
  const std::size_t ws = s.weight_size();
  const ConstMap<T> w(weight, s.out_channels, kk);
  // Per-sample weight gradients, reduced in sample order afterwards.
  std::vector<T> dw(ws * batch);
  std::vector<T> db(static_cast<std::size_t>(s.out_channels) * batch);
#pragma omp parallel
  {
    std::vector<T> cols(static_cast<std::size_t>(kk) * hw);
#pragma omp for schedule(static)
    for (int b = 0; b < batch; ++b) {
      const ConstMap<T> g(d_out + b * s.out_size(), s.out_channels, hw);
      Im2Col(s, in + b * s.in_size(), cols.data());
      Map<T>(dw.data() + b * ws, s.out_channels, kk).noalias() =
          g * ConstMap<T>(cols.data(), kk, hw).transpose();
      // Plain loop: Eigen's vectorized sum depends on pointer alignment.
      for (int o = 0; o < s.out_channels; ++o) {
        const T* row = d_out + b * s.out_size() + static_cast<std::size_t>(o) * hw;
        T acc = T(0);
        for (int i = 0; i < hw; ++i) acc += row[i];
        db[static_cast<std::size_t>(b) * s.out_channels + o] = acc;
      }
      if (d_in) {
        Map<T>(cols.data(), kk, hw).noalias() = w.transpose() * g;
        Col2Im(s, cols.data(), d_in + b * s.in_size());
      }
    }
  }
  for (int b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < ws; ++i) d_weight[i] += dw[b * ws + i];
    if (d_bias) {
      for (int o = 0; o < s.out_channels; ++o) {
        d_bias[o] += db[static_cast<std::size_t>(b) * s.out_channels + o];
      }
    }
  }
}

#define BCAUTH_INSTANTIATE(T)                                                      \
  template void Conv2dForwardReference<T>(const Conv2dShape&, const T*, const T*, \
                                          const T*, T*);                           \
  template void Conv2dBackwardReference<T>(const Conv2dShape&, const T*,         \
                                           const T*, const T*, T*, T*, T*);        \
  template void Conv2dForward<T>(const Conv2dShape&, int, const T*, const T*,     \
                                 const T*, T*);                                    \
  template void Conv2dBackward<T>(const Conv2dShape&, int, const T*, const T*,    \
                                  const T*, T*, T*, T*);
BCAUTH_INSTANTIATE(float)
BCAUTH_INSTANTIATE(double)
#undef BCAUTH_INSTANTIATE

}  // namespace bcauth::kernels
