// Copyright 2026 The DriverSense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIVERSENSE_PIPELINE_MANIFEST_HPP_
#define DRIVERSENSE_PIPELINE_MANIFEST_HPP_

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/pipeline/config.hpp"
#include "driversense/serialization.hpp"

#ifndef DRIVERSENSE_VERSION
#define DRIVERSENSE_VERSION "1.0.0"
#endif

namespace driversense::pipeline {

inline constexpr const char* kToolVersion = DRIVERSENSE_VERSION;

inline std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot read '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    ThrowInvariant("sha256 initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), in.gcount());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

struct FileDigest {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

inline FileDigest DigestOf(const std::filesystem::path& path) {
  return {path.string(), Sha256File(path), std::filesystem::file_size(path)};
}

// Provenance record for one command. Written even when the command fails.
struct RunManifest {
  std::string command;
  std::string status = "running";
  std::string error;
  PipelineConfig config;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::pair<std::string, std::int64_t>> counters;

  Json ToJson() const {
    Json cfg = Json::object();
    for (const auto& [k, v] : ConfigSnapshot(config)) cfg[k] = v;
    auto files = [](const std::vector<FileDigest>& v) {
      Json a = Json::array();
      for (const auto& f : v) {
        a.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
      }
      return a;
    };
    Json timings = Json::object();
    for (const auto& [k, v] : timings_ms) timings[k] = v;
    Json counts = Json::object();
    for (const auto& [k, v] : counters) counts[k] = v;
    return {{"tool", "driversense"},
            {"version", kToolVersion},
            {"command", command},
            {"status", status},
            {"error", error},
            {"seed", config.seed},
            {"config", cfg},
            {"inputs", files(inputs)},
            {"outputs", files(outputs)},
            {"counters", counts},
            {"timings_ms", timings}};
  }

  void Write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) ThrowIo("cannot write manifest '" + path.string() + "'");
    out << ToJson().dump(2) << '\n';
  }
};

// Accumulates wall-clock time of one stage into a manifest.
class StageTimer {
 public:
  StageTimer(RunManifest& manifest, std::string name)
      : manifest_(manifest),
        name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto end = std::chrono::steady_clock::now();
    manifest_.timings_ms.emplace_back(
        name_, std::chrono::duration<double, std::milli>(end - start_).count());
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  RunManifest& manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace driversense::pipeline

#endif  // DRIVERSENSE_PIPELINE_MANIFEST_HPP_
