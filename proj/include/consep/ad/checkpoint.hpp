// include/consep/ad/checkpoint.hpp

// Copyright 2026 The consep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONSEP_AD_CHECKPOINT_HPP_
#define CONSEP_AD_CHECKPOINT_HPP_

// Binary container of named tensors:
//
//   bytes 0..7   magic "CSEPCKPT"
//   bytes 8..11  container version, u32 little-endian
//   bytes 12..19 header length H, u64 little-endian
//   H bytes      UTF-8 JSON header {"dtype", "tensors": [{name, shape, offset}], "meta"}
//   payload      tensor data, little-endian, offsets relative to payload start
//
// dtype is "f64" (default, exact round trip) or "f32".

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "consep/array.hpp"
#include "json.hpp"

namespace consep::ad {

enum class StorageType { kFloat64, kFloat32 };

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Array>> tensors;

  const Array& at(const std::string& name) const;
  bool contains(const std::string& name) const;
};

inline constexpr unsigned kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt,
                      StorageType type = StorageType::kFloat64);
/// Throws ValidationError on a bad magic, unknown version or truncated file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace consep::ad

#endif  // CONSEP_AD_CHECKPOINT_HPP_
