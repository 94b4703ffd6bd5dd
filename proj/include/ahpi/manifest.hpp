// Copyright 2026 The AHPI Ranking Authors.
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

#pragma once

// Run manifests: every stage records SHA-256 digests of what it read and
// wrote next to its primary output, and a later stage that consumes that
// output checks the digest before trusting it.

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ahpi/io.hpp"
#include "ahpi/version.hpp"
#include "json.hpp"

namespace ahpi {

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

inline std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

struct ManifestBuilder {
  std::string stage;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  // Digests the files as they are on disk now; call after outputs are written.
  std::string render() const {
    nlohmann::ordered_json j;
    j["tool"] = "ahpi";
    j["version"] = kVersion;
    j["stage"] = stage;
    j["seed"] = seed;
    j["config"] = config;
    auto files = [](const std::vector<std::filesystem::path>& paths) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& p : paths)
        arr.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}});
      return arr;
    };
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    return j.dump(2) + "\n";
  }

  void write(const std::filesystem::path& primary_output) const {
    write_file_atomic(manifest_path(primary_output), render());
  }
};

// If `artifact` has a manifest from the stage that produced it, its current
// digest must match the recorded one. Artifacts without a manifest pass.
inline void verify_artifact(const std::filesystem::path& artifact) {
  const auto mpath = manifest_path(artifact);
  if (!std::filesystem::exists(mpath)) return;
  const auto j = nlohmann::json::parse(read_file(mpath));
  const std::string name = artifact.filename().string();
  for (const auto& entry : j.at("outputs")) {
    if (entry.at("path").get<std::string>() != name) continue;
    if (entry.at("sha256").get<std::string>() != sha256_file(artifact))
      throw IoError(IoErrc::ManifestMismatch,
                    artifact.string() + " changed since its manifest was written");
    return;
  }
}

}  // namespace ahpi
