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

#ifndef BCAUTH_BCSR_MODEL_H_
#define BCAUTH_BCSR_MODEL_H_

#include <filesystem>
#include <optional>

#include "bcauth/bcsr/features.h"
#include "bcauth/bcsr/network.h"

namespace bcauth::bcsr {

struct Model {
  FeatureConfig features;
  Network<float> net;
  std::optional<double> cosine_threshold;  // calibrated at training time
};

// Checkpoint layout: <path> holds the tensors, <path>.json the architecture.
//   "BCSRCKPT" | u32 version | u32 count |
//   count x { u32 name_len | name | u32 ndim | u32 dims[ndim] | f32 data }
// All integers and floats little-endian.
void SaveModel(const std::filesystem::path& path, const Model& model);
Model LoadModel(const std::filesystem::path& path);

std::filesystem::path DescriptorPath(const std::filesystem::path& checkpoint);

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_MODEL_H_
