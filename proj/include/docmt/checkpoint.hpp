// Copyright 2026 The docmt Authors
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "docmt/model.hpp"

namespace docmt {

// Binary layout, all integers little-endian:
//   magic "DOCMTCKP" | u32 version
//   u64 n | n bytes ModelConfig::serialize()
//   u64 n | n bytes metadata as key=value lines
//   u64 count | count x { u32 n | name | u32 rank | rank x u64 dim | f64 values }
inline constexpr std::string_view kCheckpointMagic = "DOCMTCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  ModelConfig config;
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  const Tensor* find(std::string_view name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

// Writes through a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint model_checkpoint(const Model& model);
// Extra tensors (optimizer moments) are ignored; every model tensor must be present.
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace docmt
