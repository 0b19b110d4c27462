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

#include "bcauth/bcsr/model.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bcauth/error.h"

namespace bcauth::bcsr {
namespace {

constexpr char kMagic[8] = {'B', 'C', 'S', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void PutU32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t GetU32(std::istream& is, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) {
    throw Error(ErrorKind::kIo, path.string() + ": truncated checkpoint");
  }
  return v;
}

}  // namespace

std::filesystem::path DescriptorPath(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

void SaveModel(const std::filesystem::path& path, const Model& model) {
  nlohmann::json desc;
  desc["format"] = "bcsr-checkpoint";
  desc["version"] = kVersion;
  desc["network"] = model.net.spec();
  desc["features"] = model.features;
  desc["calibration"] = {{"cosine_threshold", model.cosine_threshold
                                                  ? nlohmann::json(*model.cosine_threshold)
                                                  : nlohmann::json()}};
  desc["tensors"] = nlohmann::json::array();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(kMagic, 8);
  PutU32(os, kVersion);
  PutU32(os, static_cast<std::uint32_t>(model.net.params().size()));
  for (const Tensor<float>& t : model.net.params()) {
    PutU32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    PutU32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) PutU32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    desc["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  }
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + path.string());
  std::ofstream js(DescriptorPath(path));
  if (!js) throw Error(ErrorKind::kIo, "cannot write " + DescriptorPath(path).string());
  js << desc.dump(2) << '\n';
}

Model LoadModel(const std::filesystem::path& path) {
  std::ifstream js(DescriptorPath(path));
  if (!js) throw Error(ErrorKind::kNotFound, "missing model descriptor " +
                                                 DescriptorPath(path).string());
  nlohmann::json desc;
  try {
    js >> desc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, DescriptorPath(path).string() + ": " + e.what());
  }
  Model m{desc.at("features").get<FeatureConfig>(),
          Network<float>(desc.at("network").get<NetworkSpec>()),
          std::nullopt};
  if (desc.contains("calibration") && desc["calibration"].contains("cosine_threshold") &&
      desc["calibration"]["cosine_threshold"].is_number()) {
    m.cosine_threshold = desc["calibration"]["cosine_threshold"].get<double>();
  }

  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kNotFound, "missing checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(ErrorKind::kIo, path.string() + ": not a checkpoint");
  }
  if (GetU32(is, path) != kVersion) {
    throw Error(ErrorKind::kIo, path.string() + ": unsupported checkpoint version");
  }
  const std::uint32_t count = GetU32(is, path);
  if (count != m.net.params().size()) {
    throw Error(ErrorKind::kIo, path.string() + ": tensor count does not match descriptor");
  }
  for (Tensor<float>& t : m.net.params()) {
    std::string name(GetU32(is, path), '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    std::vector<int> shape(GetU32(is, path));
    for (int& d : shape) d = static_cast<int>(GetU32(is, path));
    if (name != t.name || shape != t.shape) {
      throw Error(ErrorKind::kIo, path.string() + ": unexpected tensor " + name);
    }
    if (!is.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(float)))) {
      throw Error(ErrorKind::kIo, path.string() + ": truncated tensor " + name);
    }
  }
  return m;
}

}  // namespace bcauth::bcsr
