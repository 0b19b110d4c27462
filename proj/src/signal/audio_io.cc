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

#include "bcauth/signal/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bcauth/error.h"
#include "json.hpp"

namespace bcauth::signal {
namespace {

using nlohmann::json;

void WriteU32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void WriteU16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint32_t U32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t U16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<unsigned char> Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

Error IoError(const std::filesystem::path& path, const std::string& what) {
  return Error(ErrorKind::kIo, path.string() + ": " + what);
}

}  // namespace

Waveform ReadWav(const std::filesystem::path& path) {
  const std::vector<unsigned char> data = Slurp(path);
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw IoError(path, "not a RIFF/WAVE file");
  }
  int format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::uint32_t size = U32(data.data() + pos + 4);
    const unsigned char* body = data.data() + pos + 8;
    if (pos + 8 + size > data.size()) throw IoError(path, "truncated chunk");
    if (std::memcmp(data.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(path, "short fmt chunk");
      format = U16(body);
      channels = U16(body + 2);
      rate = U32(body + 4);
      bits = U16(body + 14);
      if (format == 0xFFFE && size >= 26) format = U16(body + 24);
    } else if (std::memcmp(data.data() + pos, "data", 4) == 0) {
      if (channels != 1) throw IoError(path, "only mono WAV is supported");
      std::vector<double> samples;
      if (format == 1 && bits == 16) {
        samples.resize(size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto v = static_cast<std::int16_t>(U16(body + 2 * i));
          samples[i] = v / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        samples.resize(size / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          float f;
          std::uint32_t u = U32(body + 4 * i);
          std::memcpy(&f, &u, 4);
          samples[i] = f;
        }
      } else {
        throw IoError(path, "unsupported WAV encoding");
      }
      return Waveform(std::move(samples), static_cast<int>(rate));
    }
    pos += 8 + size + (size & 1);
  }
  throw IoError(path, "missing data chunk");
}

void WriteWav(const std::filesystem::path& path, const Waveform& w,
              WavFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot open for writing");
  const bool pcm = format == WavFormat::kPcm16;
  const std::uint32_t width = pcm ? 2 : 4;
  const auto n = static_cast<std::uint32_t>(w.size());
  os.write("RIFF", 4);
  WriteU32(os, 36 + width * n);
  os.write("WAVEfmt ", 8);
  WriteU32(os, 16);
  WriteU16(os, pcm ? 1 : 3);
  WriteU16(os, 1);
  WriteU32(os, static_cast<std::uint32_t>(w.sample_rate()));
  WriteU32(os, static_cast<std::uint32_t>(w.sample_rate()) * width);
  WriteU16(os, static_cast<std::uint16_t>(width));
  WriteU16(os, static_cast<std::uint16_t>(8 * width));
  os.write("data", 4);
  WriteU32(os, width * n);
  for (double s : w.samples()) {
    if (pcm) {
      const double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
      WriteU16(os, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(std::lround(c * 32768.0))));
    } else {
      const float f = static_cast<float>(s);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      WriteU32(os, bits);
    }
  }
  if (!os) throw IoError(path, "write failed");
}

AccelRecord AccelRecord::FromWaveform(const Waveform& w) {
  AccelRecord r;
  r.axes.emplace_back(w.samples().begin(), w.samples().end());
  r.sample_rate = w.sample_rate();
  return r;
}

AccelRecord ReadAccelCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "t,x,y,z") throw IoError(path, "expected header t,x,y,z");
  AccelRecord r;
  r.axes.assign(3, {});
  std::vector<double> t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[4];
    for (int c = 0; c < 4; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw IoError(path, "line " + std::to_string(lineno) + ": expected 4 columns");
      }
      try {
        v[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw IoError(path, "line " + std::to_string(lineno) + ": bad number");
      }
    }
    t.push_back(v[0]);
    for (int a = 0; a < 3; ++a) r.axes[a].push_back(v[a + 1]);
  }
  if (t.size() < 2 || t.back() <= t.front()) {
    throw IoError(path, "need at least two increasing time stamps");
  }
  r.sample_rate = static_cast<int>(
      std::lround(static_cast<double>(t.size() - 1) / (t.back() - t.front())));
  return r;
}

void WriteAccelCsv(const std::filesystem::path& path, const AccelRecord& r) {
  Require(r.axes.size() == 3, "accel csv needs three axes");
  std::ofstream os(path);
  if (!os) throw IoError(path, "cannot open for writing");
  os << "t,x,y,z\n" << std::setprecision(9);
  for (std::size_t i = 0; i < r.size(); ++i) {
    os << static_cast<double>(i) / r.sample_rate << ',' << r.axes[0][i] << ','
       << r.axes[1][i] << ',' << r.axes[2][i] << '\n';
  }
  if (!os) throw IoError(path, "write failed");
}

AccelRecord ReadAccelBinary(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw IoError(sidecar, "cannot open");
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw IoError(sidecar, e.what());
  }
  AccelRecord r;
  r.sample_rate = meta.value("sample_rate", 0);
  if (r.sample_rate <= 0) throw IoError(sidecar, "missing sample_rate");
  for (const auto& name : meta.at("axes")) {
    const auto file = sidecar.parent_path() / name.get<std::string>();
    const std::vector<unsigned char> raw = Slurp(file);
    if (raw.size() % 4 != 0) throw IoError(file, "size not a multiple of 4");
    std::vector<double> axis(raw.size() / 4);
    for (std::size_t i = 0; i < axis.size(); ++i) {
      float f;
      std::uint32_t u = U32(raw.data() + 4 * i);
      std::memcpy(&f, &u, 4);
      axis[i] = f;
    }
    r.axes.push_back(std::move(axis));
  }
  if (r.axes.empty()) throw IoError(sidecar, "no axes listed");
  for (const auto& a : r.axes) {
    if (a.size() != r.axes.front().size()) throw IoError(sidecar, "axis lengths differ");
  }
  return r;
}

void WriteAccelBinary(const std::filesystem::path& sidecar,
                      const AccelRecord& r) {
  static const char* kNames[] = {"x", "y", "z"};
  Require(!r.axes.empty() && r.axes.size() <= 3, "accel binary needs 1-3 axes");
  json meta;
  meta["sample_rate"] = r.sample_rate;
  meta["axes"] = json::array();
  const std::string stem = sidecar.stem().string();
  for (std::size_t a = 0; a < r.axes.size(); ++a) {
    const std::string name = stem + "." + kNames[a] + ".f32";
    std::ofstream os(sidecar.parent_path() / name, std::ios::binary);
    if (!os) throw IoError(sidecar.parent_path() / name, "cannot open for writing");
    for (double v : r.axes[a]) {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      WriteU32(os, u);
    }
    meta["axes"].push_back(name);
  }
  std::ofstream os(sidecar);
  if (!os) throw IoError(sidecar, "cannot open for writing");
  os << meta.dump(2) << '\n';
}

AccelRecord ReadAccel(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return ReadAccelCsv(path);
  if (ext == ".json") return ReadAccelBinary(path);
  if (ext == ".wav") return AccelRecord::FromWaveform(ReadWav(path));
  throw Error(ErrorKind::kInvalidArgument,
              "unrecognized accelerometer format: " + path.string());
}

}  // namespace bcauth::signal
