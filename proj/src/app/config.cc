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

#include "bcauth/app/config.h"

#include <cstdlib>
#include <fstream>

#include "bcauth/error.h"

namespace bcauth::app {
namespace {

void ApplyEnvironment(PipelineConfig& c) {
  if (const char* s = std::getenv("BCAUTH_TEMPLATE_STORE"); s && *s) {
    c.paths.template_store = s;
  }
  if (const char* m = std::getenv("BCAUTH_MODEL"); m && *m) c.paths.model = m;
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

const char* Stage2ModeName(Stage2Mode m) {
  return m == Stage2Mode::kVerify ? "verify" : "identify";
}

Stage2Mode ParseStage2Mode(const std::string& name) {
  if (name == "verify") return Stage2Mode::kVerify;
  if (name == "identify") return Stage2Mode::kIdentify;
  throw Error(ErrorKind::kInvalidArgument, "unknown stage2 mode: " + name);
}

std::filesystem::path PathsConfig::DetectorPath() const {
  if (!detector.empty()) return detector;
  return model.string() + ".detector.json";
}

void PipelineConfig::Validate() const {
  init.Validate();
  tcs.Validate();
  features.Validate();
  train.Validate();
  Require(features.sample_rate == init.target_rate,
          "config: feature rate must equal the initialization target rate");
  Require(pretrain_epochs >= 0, "config: pretrain_epochs must be >= 0");
  Require(dev_fraction >= 0.0 && dev_fraction < 1.0, "config: dev_fraction must be in [0, 1)");
  Require(!stage2.threshold || (*stage2.threshold >= -1.0 && *stage2.threshold <= 1.0),
          "config: cosine threshold must be in [-1, 1]");
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  std::vector<std::string> roots;
  for (const auto& r : c.paths.corpus_roots) roots.push_back(r.string());
  j = {{"init", c.init},
       {"tcs", c.tcs},
       {"bcsr",
        {{"features", c.features},
         {"network", c.network},
         {"train", c.train},
         {"pretrain_epochs", c.pretrain_epochs},
         {"dev_fraction", c.dev_fraction}}},
       {"stage2",
        {{"mode", Stage2ModeName(c.stage2.mode)},
         {"layer", bcsr::LayerTagName(c.stage2.layer)},
         {"threshold", c.stage2.threshold ? nlohmann::json(*c.stage2.threshold)
                                          : nlohmann::json()},
         {"identify_min_score", c.stage2.identify_min_score},
         {"machine_detector", c.stage2.machine_detector}}},
       {"paths",
        {{"model", c.paths.model.string()},
         {"template_store", c.paths.template_store.string()},
         {"detector", c.paths.detector.string()},
         {"corpus_roots", roots}}}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  if (j.contains("init")) c.init = j["init"].get<init::InitConfig>();
  if (j.contains("tcs")) c.tcs = j["tcs"].get<tcs::TcsConfig>();
  if (j.contains("bcsr")) {
    const auto& b = j["bcsr"];
    if (b.contains("features")) c.features = b["features"].get<bcsr::FeatureConfig>();
    if (b.contains("network")) c.network = b["network"].get<bcsr::NetworkSpec>();
    if (b.contains("train")) c.train = b["train"].get<bcsr::TrainConfig>();
    c.pretrain_epochs = b.value("pretrain_epochs", c.pretrain_epochs);
    c.dev_fraction = b.value("dev_fraction", c.dev_fraction);
  }
  if (j.contains("stage2")) {
    const auto& s = j["stage2"];
    c.stage2.mode = ParseStage2Mode(s.value("mode", std::string("verify")));
    c.stage2.layer = bcsr::ParseLayerTag(s.value("layer", std::string("layer-1")));
    if (s.contains("threshold") && s["threshold"].is_number()) {
      c.stage2.threshold = s["threshold"].get<double>();
    }
    c.stage2.identify_min_score = s.value("identify_min_score", c.stage2.identify_min_score);
    c.stage2.machine_detector = s.value("machine_detector", c.stage2.machine_detector);
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    c.paths.model = p.value("model", c.paths.model.string());
    c.paths.template_store = p.value("template_store", c.paths.template_store.string());
    c.paths.detector = p.value("detector", std::string());
    c.paths.corpus_roots.clear();
    for (const auto& r : p.value("corpus_roots", std::vector<std::string>{})) {
      c.paths.corpus_roots.emplace_back(r);
    }
  }
}

PipelineConfig LoadPipelineConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config " + path.string());
  PipelineConfig c;
  try {
    nlohmann::json j;
    in >> j;
    c = j.get<PipelineConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
  const std::filesystem::path base = path.parent_path();
  c.paths.model = Resolve(base, c.paths.model);
  c.paths.template_store = Resolve(base, c.paths.template_store);
  c.paths.detector = Resolve(base, c.paths.detector);
  for (auto& r : c.paths.corpus_roots) {
    r = Resolve(base, r);
    Require(std::filesystem::is_directory(r), "config: corpus root not found: " + r.string(),
            ErrorKind::kNotFound);
  }
  ApplyEnvironment(c);
  c.Validate();
  return c;
}

PipelineConfig DefaultPipelineConfig() {
  PipelineConfig c;
  ApplyEnvironment(c);
  return c;
}

void SavePipelineConfig(const std::filesystem::path& path, const PipelineConfig& c) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << nlohmann::json(c).dump(2) << '\n';
}

}  // namespace bcauth::app
