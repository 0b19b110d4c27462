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

#ifndef BCAUTH_BCSR_NETWORK_H_
#define BCAUTH_BCSR_NETWORK_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bcauth/kernels/conv2d.h"
#include "json.hpp"

namespace bcauth::bcsr {

// Architecture and label space. Inputs are (in_bins x in_frames) features,
// average-pooled by (pool_f x pool_t), then a 3x3 stem and three residual
// blocks (stride-2 3x3, ReLU, 3x3, plus a strided 1x1 shortcut, ReLU).
// Activations are averaged over time only, so the pooled vector keeps
// frequency position: width block_channels[2] * final_height.
struct NetworkSpec {
  int in_bins = 285;
  int in_frames = 800;
  int pool_f = 4;
  int pool_t = 8;
  int stem_channels = 16;
  std::array<int, 3> block_channels = {16, 32, 64};
  int embed_dim = 512;   // speaker FC-512
  int cond_hidden = 128; // condition FC-128
  int num_speakers = 2;
  int num_conditions = 4;
  double lambda = 0.1;
  std::vector<std::string> speaker_ids;  // label order; size num_speakers

  void Validate() const;
  int pooled_h() const { return in_bins / pool_f; }
  int pooled_w() const { return in_frames / pool_t; }
  // Height/width after the stem (index 0) and after each block (1..3).
  int height(int stage) const;
  int width(int stage) const;
  int feature_dim() const { return block_channels[2] * height(3); }
};

void to_json(nlohmann::json& j, const NetworkSpec& s);
void from_json(const nlohmann::json& j, NetworkSpec& s);

// layer-1: FC-512 activation, layer-2: speaker logits, layer-3: softmax.
enum class LayerTag { kLayer1, kLayer2, kLayer3 };
const char* LayerTagName(LayerTag t);
LayerTag ParseLayerTag(const std::string& name);

enum class ParamGroup { kFeature, kSpeaker, kCondition };

template <typename T>
struct Tensor {
  std::string name;
  std::vector<int> shape;
  ParamGroup group = ParamGroup::kFeature;
  std::vector<T> data;
};

struct ForwardOutputs {
  std::vector<double> pooled;      // feature-extractor output
  std::vector<double> layer1;      // FC-512 activation (after ReLU)
  std::vector<double> logits;      // speaker logits
  std::vector<double> softmax;
  std::vector<double> condition_softmax;
};

// How the condition branch feeds back into the feature extractor.
struct LossWeights {
  double speaker = 1.0;
  double lambda = 0.1;
  bool reverse = true;  // false: +lambda dL_v instead of -lambda dL_v
};

struct LossValue {
  double total = 0.0;      // speaker * L_s - lambda * L_v
  double speaker = 0.0;    // L_s, batch mean
  double condition = 0.0;  // L_v, batch mean
  int speaker_correct = 0;
  int condition_correct = 0;
};

template <typename T>
class Network {
 public:
  explicit Network(const NetworkSpec& spec);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<Tensor<T>>& params() { return params_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  std::size_t input_size() const {
    return static_cast<std::size_t>(spec_.in_bins) * spec_.in_frames;
  }

  // He-normal weights, zero biases.
  void Init(std::uint64_t seed);

  // inputs: batch consecutive features. grads (same layout as params) are
  // overwritten when non-null: feature-extractor parameters get
  // speaker * dL_s -/+ lambda * dL_v, the speaker head speaker * dL_s, and the
  // condition head dL_v.
  LossValue ForwardBackward(const T* inputs, int batch, const int* speaker,
                            const int* condition, const LossWeights& w,
                            std::vector<std::vector<T>>* grads) const;

  ForwardOutputs Forward(const T* input) const;

  std::vector<std::vector<T>> ZeroGrads() const;

 private:
  struct Block {
    kernels::Conv2dShape a, b, shortcut;
    int wa, ba, wb, bb, ws, bs;  // parameter indices
  };
  struct Trace;

  void Run(const T* inputs, int batch, Trace& tr) const;
  int AddParam(const std::string& name, std::vector<int> shape, ParamGroup g);

  NetworkSpec spec_;
  std::vector<Tensor<T>> params_;
  kernels::Conv2dShape stem_;
  int stem_w_, stem_b_;
  std::array<Block, 3> blocks_;
  int fc1_w_, fc1_b_, fc2_w_, fc2_b_;
  int cv1_w_, cv1_b_, cv2_w_, cv2_b_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_NETWORK_H_
