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

// Drives the bcauth binary through its documented exit codes and outputs.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bcauth/synth/corpus.h"
#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& Work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "bcauth_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run Bcauth(const std::string& args) {
  const fs::path out = Work() / "stdout.txt", err = Work() / "stderr.txt";
  const std::string cmd = "BCAUTH_MODEL='" + (Work() / "model.ckpt").string() +
                          "' BCAUTH_TEMPLATE_STORE='" + (Work() / "templates.json").string() +
                          "' '" BCAUTH_CLI_PATH "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(out);
  r.err = Slurp(err);
  return r;
}

std::string Path(const std::string& rel) { return "'" + (Work() / rel).string() + "'"; }

TEST_CASE("help exits 0 for the tool and every subcommand") {
  CHECK(Bcauth("--help").code == 0);
  for (const char* sub : {"synth", "init", "tcs", "train", "enroll", "verify", "identify",
                          "detect-machine", "eval", "authenticate"}) {
    INFO(sub);
    CHECK(Bcauth(std::string(sub) + " --help").code == 0);
  }
}

TEST_CASE("usage and I/O errors exit 2 with a JSON error on stderr") {
  Run r = Bcauth("authenticate");
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).at("error").at("kind") == "usage");
  r = Bcauth("tcs --ac /nonexistent_ac.wav --bc /nonexistent_bc.wav");
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).at("error").at("kind") == "io");
  r = Bcauth("eval --protocol nonsense --corpus /tmp --out /tmp/x");
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).contains("error"));
}

TEST_CASE("synth, train, enroll and authenticate end to end") {
  Run r = Bcauth("synth --out " + Path("genuine") + " --speakers 3 --utterances 8 --seed 5 "
                 "--duration 8.5");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("pairs") == 24);

  bcauth::synth::SceneTemplate ft;
  ft.duration_s = 8.5;
  ft.scene.attack = bcauth::synth::AttackClass::kFalseTrigger;
  std::ofstream(Work() / "ft_mix.json") << bcauth::synth::SceneMixToJson({ft}).dump();
  r = Bcauth("synth --out " + Path("attack") + " --speakers 3 --utterances 1 --seed 5 --mix " +
             Path("ft_mix.json"));
  REQUIRE(r.code == 0);

  r = Bcauth("train --corpus " + Path("genuine") + " --epochs 8 --report " +
             Path("train_report.json"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(Work() / "model.ckpt"));
  CHECK(json::parse(Slurp(Work() / "train_report.json")).is_object());

  r = Bcauth("enroll --user spk00 --clips " + Path("genuine/pairs/spk00_u000_bc.wav") + " " +
             Path("genuine/pairs/spk00_u001_bc.wav"));
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("user_id") == "spk00");
  CHECK(fs::exists(Work() / "templates.json"));

  // Genuine pair: Stage I must pass; the final verdict decides 0 or 1.
  r = Bcauth("authenticate --user spk00 --ac " + Path("genuine/pairs/spk00_u002_ac.wav") +
             " --bc " + Path("genuine/pairs/spk00_u002_bc.wav") + " --timings");
  REQUIRE((r.code == 0 || r.code == 1));
  json d = json::parse(r.out);
  CHECK(d.at("stage1").at("accepted") == true);
  CHECK(d.at("stage2").is_object());
  CHECK(d.at("final") == (r.code == 0));
  CHECK(d.contains("timings_ms"));

  // False trigger: denied at Stage I, record still printed.
  r = Bcauth("authenticate --user spk00 --ac " + Path("attack/pairs/spk00_u000_ac.wav") +
             " --bc " + Path("attack/pairs/spk00_u000_bc.wav"));
  CHECK(r.code == 1);
  d = json::parse(r.out);
  CHECK(d.at("stage1").at("accepted") == false);
  CHECK(d.at("stage2") == "skipped (stage1 rejected)");
  CHECK(d.at("final") == false);

  // Unknown user.
  r = Bcauth("authenticate --user nobody --ac " + Path("genuine/pairs/spk01_u000_ac.wav") +
             " --bc " + Path("genuine/pairs/spk01_u000_bc.wav"));
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).at("error").at("kind") == "not_found");

  r = Bcauth("identify --probe " + Path("genuine/pairs/spk01_u000_bc.wav"));
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("scores").size() == 3);

  r = Bcauth("eval --protocol stage1_normal_vs_false_trigger --corpus " + Path("attack") +
             " --out " + Path("eval"));
  CHECK(r.code == 2);  // no genuine pairs in that corpus
}

}  // namespace
