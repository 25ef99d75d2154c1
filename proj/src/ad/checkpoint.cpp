// src/ad/checkpoint.cpp

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

#include "consep/ad/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "consep/error.hpp"

namespace consep::ad {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'E', 'P', 'C', 'K', 'P', 'T'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

const Array& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, a] : tensors)
    if (n == name) return a;
  throw ValidationError("checkpoint: no tensor named '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.first == name) return true;
  return false;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, StorageType type) {
  const bool f32 = type == StorageType::kFloat32;
  nlohmann::json header;
  header["dtype"] = f32 ? "f32" : "f64";
  header["meta"] = ckpt.meta;
  header["tensors"] = nlohmann::json::array();
  std::string payload;
  for (const auto& [name, a] : ckpt.tensors) {
    header["tensors"].push_back({{"name", name}, {"shape", a.shape()}, {"offset", payload.size()}});
    for (double v : a.data()) {
      if (f32)
        put_le(payload, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      else
        put_le(payload, std::bit_cast<std::uint64_t>(v));
    }
  }
  const std::string head = header.dump();
  std::string blob(kMagic, kMagic + 8);
  put_le(blob, static_cast<std::uint32_t>(kCheckpointVersion));
  put_le(blob, static_cast<std::uint64_t>(head.size()));
  blob += head;
  blob += payload;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("checkpoint: cannot open '" + path.string() + "' for writing");
  os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!os) throw ValidationError("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("checkpoint: cannot open '" + path.string() + "'");
  std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < 20 || std::memcmp(blob.data(), kMagic, 8) != 0)
    throw ValidationError("checkpoint: '" + path.string() + "' is not a checkpoint file");
  const auto version = get_le<std::uint32_t>(bytes + 8);
  if (version != kCheckpointVersion)
    throw ValidationError("checkpoint: unsupported container version " + std::to_string(version));
  const auto head_len = get_le<std::uint64_t>(bytes + 12);
  if (20 + head_len > blob.size()) throw ValidationError("checkpoint: truncated header");
  const auto header = nlohmann::json::parse(blob.substr(20, head_len));
  const bool f32 = header.at("dtype").get<std::string>() == "f32";
  const std::size_t width = f32 ? 4 : 8;
  const unsigned char* payload = bytes + 20 + head_len;
  const std::size_t payload_len = blob.size() - 20 - head_len;

  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& t : header.at("tensors")) {
    Shape shape = t.at("shape").get<Shape>();
    const std::size_t offset = t.at("offset").get<std::size_t>();
    Array a(shape);
    if (offset + a.size() * width > payload_len)
      throw ValidationError("checkpoint: tensor '" + t.at("name").get<std::string>() + "' is truncated");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const unsigned char* p = payload + offset + i * width;
      a[i] = f32 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                 : std::bit_cast<double>(get_le<std::uint64_t>(p));
    }
    ckpt.tensors.emplace_back(t.at("name").get<std::string>(), std::move(a));
  }
  return ckpt;
}

}  // namespace consep::ad
