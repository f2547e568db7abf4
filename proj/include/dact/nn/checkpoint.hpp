// Copyright 2026 The dact Authors.
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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dact/nn/graph.hpp"

namespace dact::nn {

// Binary checkpoint layout (little-endian host order):
//   "DACTCKPT" | u32 version | u32 scalar bytes | u64 metadata length | metadata JSON
//   | u64 parameter count | per parameter: u32 name length | name | u64 rows | u64 cols
//   | u8 trainable | rows*cols scalars (column-major)
inline constexpr char kCheckpointMagic[8] = {'D', 'A', 'C', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("truncated checkpoint");
  return value;
}

}  // namespace detail

template <typename Scalar>
void write_checkpoint(LayerGraph<Scalar>& graph, const nlohmann::json& metadata, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, sizeof(Scalar));
  const std::string meta = metadata.dump();
  detail::put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  const auto params = graph.parameters();
  detail::put<std::uint64_t>(out, params.size());
  for (const auto* p : params) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    detail::put<std::uint8_t>(out, p->trainable ? 1 : 0);
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(Scalar) * static_cast<std::size_t>(p->value.size())));
  }
}

// Reads the metadata block only.
inline nlohmann::json read_checkpoint_metadata(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw ParseError("not a dact checkpoint");
  if (detail::get<std::uint32_t>(in) != kCheckpointVersion) throw ParseError("unsupported checkpoint version");
  detail::get<std::uint32_t>(in);
  const auto len = detail::get<std::uint64_t>(in);
  std::string meta(len, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(len))) throw ParseError("truncated checkpoint metadata");
  return nlohmann::json::parse(meta);
}

/// Loads parameter values into an already-built graph of the same architecture.
template <typename Scalar>
nlohmann::json read_checkpoint(LayerGraph<Scalar>& graph, std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw ParseError("not a dact checkpoint");
  if (detail::get<std::uint32_t>(in) != kCheckpointVersion) throw ParseError("unsupported checkpoint version");
  if (detail::get<std::uint32_t>(in) != sizeof(Scalar)) throw ParseError("checkpoint scalar width differs from the model");
  const auto len = detail::get<std::uint64_t>(in);
  std::string meta(len, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(len))) throw ParseError("truncated checkpoint metadata");
  const auto params = graph.parameters();
  if (detail::get<std::uint64_t>(in) != params.size()) throw ParseError("checkpoint parameter count differs from the model");
  for (auto* p : params) {
    const auto name_len = detail::get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw ParseError("truncated checkpoint");
    if (name != p->name) throw ParseError("checkpoint parameter '" + name + "' where '" + p->name + "' was expected");
    const auto rows = static_cast<Index>(detail::get<std::uint64_t>(in));
    const auto cols = static_cast<Index>(detail::get<std::uint64_t>(in));
    p->trainable = detail::get<std::uint8_t>(in) != 0;
    if (name == "embedding") {
      // The lookup table may belong to a different vocabulary size than the template graph.
      p->value.resize(rows, cols);
    } else if (rows != p->value.rows() || cols != p->value.cols()) {
      throw ParseError("checkpoint parameter '" + name + "' has the wrong shape");
    }
    if (!in.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(sizeof(Scalar) * static_cast<std::size_t>(rows * cols))))
      throw ParseError("truncated checkpoint");
    p->zero_grad();
  }
  return nlohmann::json::parse(meta);
}

template <typename Scalar>
void save_checkpoint(LayerGraph<Scalar>& graph, const nlohmann::json& metadata, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(graph, metadata, out);
}

}  // namespace dact::nn
