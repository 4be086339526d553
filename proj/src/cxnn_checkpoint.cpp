// Copyright 2026 The rfprint Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "rfp/cxnn.hpp"

namespace rfp::nn {

namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'R', 'F', 'P', 'N', 'E', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network<float>& net, const CheckpointInfo& info) {
  json extra;
  try {
    extra = json::parse(info.extra_json);
  } catch (const json::exception&) {
    throw std::invalid_argument("checkpoint extra metadata is not valid JSON");
  }
  json header = {{"spec", json::parse(spec_to_json(net.spec()))},
                 {"seed", info.seed},
                 {"epoch", info.epoch},
                 {"num_params", net.params().size()},
                 {"extra", extra}};
  const std::string text = header.dump();

  // Complex blocks go out as all real parts, then all imaginary parts.
  std::vector<float> blob;
  blob.reserve(net.params().size());
  const auto& p = net.params();
  for (const ParamBlock<float>& b : net.blocks()) {
    if (b.is_complex) {
      for (std::size_t i = 0; i < b.count; ++i) blob.push_back(p[b.offset + 2 * i]);
      for (std::size_t i = 0; i < b.count; ++i) blob.push_back(p[b.offset + 2 * i + 1]);
    } else {
      blob.insert(blob.end(), p.begin() + static_cast<long>(b.offset),
                  p.begin() + static_cast<long>(b.offset + b.count));
    }
  }
  if (blob.size() != p.size()) throw std::logic_error("parameter blocks do not cover the parameter buffer");

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!os) throw IoError("failed writing " + path);
}

Network<float> load_checkpoint(const std::string& path, CheckpointInfo* info) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError(path + " is not a network checkpoint");
  }
  const std::uint64_t header_len = read_u64(is);
  if (header_len > (std::uint64_t{1} << 26)) throw FormatError("checkpoint header too large");
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len))) throw FormatError("truncated checkpoint");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }
  NetworkSpec spec;
  try {
    spec = spec_from_json(header.at("spec").dump());
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("bad network spec in checkpoint: ") + e.what());
  }
  Network<float> net(spec);
  if (header.value("num_params", std::uint64_t{0}) != net.params().size()) {
    throw FormatError("checkpoint parameter count does not match its network spec");
  }

  std::vector<float> blob(net.params().size());
  if (!is.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(float)))) {
    throw FormatError("truncated checkpoint weights");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint weights");

  auto& p = net.params();
  std::size_t k = 0;
  for (const ParamBlock<float>& b : net.blocks()) {
    if (b.is_complex) {
      for (std::size_t i = 0; i < b.count; ++i) p[b.offset + 2 * i] = blob[k++];
      for (std::size_t i = 0; i < b.count; ++i) p[b.offset + 2 * i + 1] = blob[k++];
    } else {
      for (std::size_t i = 0; i < b.count; ++i) p[b.offset + i] = blob[k++];
    }
  }
  if (info != nullptr) {
    info->seed = header.value("seed", std::uint64_t{0});
    info->epoch = header.value("epoch", 0);
    info->extra_json = header.contains("extra") ? header["extra"].dump() : "{}";
  }
  return net;
}

}  // namespace rfp::nn
