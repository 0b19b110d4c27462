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

#include "bcauth/bcsr/template_store.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include "bcauth/error.h"

namespace bcauth::bcsr {
namespace {

class FileLock {
 public:
  FileLock(const std::filesystem::path& store, bool exclusive) {
    const std::string lock = store.string() + ".lock";
    fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorKind::kIo, "cannot open lock file " + lock);
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw Error(ErrorKind::kIo, "cannot lock " + lock);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

TemplateStore::TemplateStore(std::filesystem::path path) : path_(std::move(path)) {
  Require(!path_.empty(), "template store: empty path");
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

std::vector<Template> TemplateStore::ReadUnlocked() const {
  if (!std::filesystem::exists(path_)) return {};
  std::ifstream in(path_);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path_.string());
  try {
    nlohmann::json j;
    in >> j;
    return j.at("templates").get<std::vector<Template>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, path_.string() + ": " + e.what());
  }
}

void TemplateStore::WriteUnlocked(const std::vector<Template>& all) const {
  const nlohmann::json j = {{"format", "bcauth-templates"}, {"version", 1}, {"templates", all}};
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path_);
}

std::vector<Template> TemplateStore::List() const {
  FileLock lock(path_, false);
  return ReadUnlocked();
}

std::optional<Template> TemplateStore::Find(const std::string& user_id) const {
  for (Template& t : List()) {
    if (t.user_id == user_id) return std::move(t);
  }
  return std::nullopt;
}

Template TemplateStore::Get(const std::string& user_id) const {
  std::optional<Template> t = Find(user_id);
  if (!t) throw Error(ErrorKind::kNotFound, "user not enrolled: " + user_id);
  return *t;
}

void TemplateStore::Put(const Template& t) {
  FileLock lock(path_, true);
  std::vector<Template> all = ReadUnlocked();
  const auto it = std::find_if(all.begin(), all.end(),
                               [&](const Template& x) { return x.user_id == t.user_id; });
  if (it == all.end()) {
    all.push_back(t);
  } else {
    *it = t;
  }
  WriteUnlocked(all);
}

bool TemplateStore::Remove(const std::string& user_id) {
  FileLock lock(path_, true);
  std::vector<Template> all = ReadUnlocked();
  const auto n = std::erase_if(all, [&](const Template& x) { return x.user_id == user_id; });
  if (n > 0) WriteUnlocked(all);
  return n > 0;
}

}  // namespace bcauth::bcsr
