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

#ifndef BCAUTH_BCSR_TEMPLATE_STORE_H_
#define BCAUTH_BCSR_TEMPLATE_STORE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcauth/bcsr/speaker.h"

namespace bcauth::bcsr {

// Templates in one JSON file. Readers take a shared flock on <path>.lock,
// writers an exclusive one; writes go to a temporary file that is renamed
// over the store, so readers never see a partial file.
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  std::vector<Template> List() const;
  std::optional<Template> Find(const std::string& user_id) const;
  Template Get(const std::string& user_id) const;  // kNotFound if absent
  // Inserts or replaces by user id.
  void Put(const Template& t);
  bool Remove(const std::string& user_id);

 private:
  std::vector<Template> ReadUnlocked() const;
  void WriteUnlocked(const std::vector<Template>& all) const;

  std::filesystem::path path_;
};

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_TEMPLATE_STORE_H_
