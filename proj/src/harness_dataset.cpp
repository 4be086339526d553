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
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "harness_internal.hpp"
#include "rfp/harness.hpp"

namespace rfp::harness {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr char kPacketMagic[8] = {'R', 'F', 'P', 'P', 'K', 'T', '0', '1'};
constexpr std::array<Split, 3> kSplits = {Split::kTrain, Split::kVal, Split::kTest};

static_assert(std::endian::native == std::endian::little, "dataset I/O assumes a little-endian host");

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError("malformed " + what + ": " + e.what());
  }
}

json profiles_to_json(const std::vector<impairments::DeviceProfile>& ps) {
  json arr = json::array();
  for (const auto& p : ps) {
    arr.push_back({{"device_id", p.device_id}, {"epsilon", p.epsilon}, {"phi", p.phi}, {"p1db", p.p1db}});
  }
  return arr;
}

// Fields that determine the generated samples.
json generating_fields(const DatasetManifest& m) {
  return {{"n_devices", m.n_devices},
          {"train_per_device", m.train_per_device},
          {"val_per_device", m.val_per_device},
          {"test_per_device", m.test_per_device},
          {"snr_db", m.snr_db},
          {"oversample_factor", m.oversample_factor},
          {"carrier_freq_hz", m.carrier_freq_hz},
          {"master_seed", m.master_seed},
          {"profiles", profiles_to_json(m.profiles)}};
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

preamble::PreambleSpec DatasetManifest::preamble_spec() const {
  preamble::PreambleSpec s;
  s.oversample_factor = oversample_factor;
  s.carrier_freq_hz = carrier_freq_hz;
  return s;
}

int DatasetManifest::per_device(Split split) const {
  switch (split) {
    case Split::kTrain:
      return train_per_device;
    case Split::kVal:
      return val_per_device;
    case Split::kTest:
      return test_per_device;
  }
  return 0;
}

void validate(const DatasetManifest& m) {
  if (m.n_devices < 1) throw std::invalid_argument("n_devices must be >= 1");
  if (m.train_per_device < 0 || m.val_per_device < 0 || m.test_per_device < 0) {
    throw std::invalid_argument("packet counts must be >= 0");
  }
  if (std::isnan(m.snr_db)) throw std::invalid_argument("snr_db must be a number");
  preamble::validate(m.preamble_spec());
  if (!m.profiles.empty()) {
    if (m.profiles.size() != static_cast<std::size_t>(m.n_devices)) {
      throw std::invalid_argument("profile count does not match n_devices");
    }
    for (std::size_t i = 0; i < m.profiles.size(); ++i) {
      impairments::validate(m.profiles[i]);
      if (m.profiles[i].device_id != static_cast<int>(i)) {
        throw std::invalid_argument("profiles must be ordered by device_id 0..n-1");
      }
    }
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j = generating_fields(m);
  json files = json::object();
  for (const auto& [split, file] : m.files) files[split] = file;
  j["files"] = files;
  j["manifest_hash"] = manifest_hash(m);
  return j.dump(2);
}

DatasetManifest manifest_from_json(const std::string& text) {
  const json j = parse_json(text, "manifest");
  DatasetManifest m;
  try {
    m.n_devices = j.value("n_devices", m.n_devices);
    m.train_per_device = j.value("train_per_device", m.train_per_device);
    m.val_per_device = j.value("val_per_device", m.val_per_device);
    m.test_per_device = j.value("test_per_device", m.test_per_device);
    m.snr_db = j.value("snr_db", m.snr_db);
    m.oversample_factor = j.value("oversample_factor", m.oversample_factor);
    m.carrier_freq_hz = j.value("carrier_freq_hz", m.carrier_freq_hz);
    m.master_seed = j.value("master_seed", m.master_seed);
    if (j.contains("profiles")) {
      for (const json& p : j.at("profiles")) {
        m.profiles.push_back({p.at("device_id").get<int>(), p.at("epsilon").get<double>(), p.at("phi").get<double>(),
                              p.at("p1db").get<double>()});
      }
    }
    if (j.contains("files")) {
      for (const auto& [k, v] : j.at("files").items()) m.files.emplace_back(k, v.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  validate(m);
  return m;
}

std::string manifest_hash(const DatasetManifest& m) {
  // FNV-1a over the canonical (sorted-key) JSON; an integrity tag, not a MAC.
  const std::string text = generating_fields(m).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PacketSet& Dataset::split(Split s) {
  return s == Split::kTrain ? train : (s == Split::kVal ? val : test);
}

const PacketSet& Dataset::split(Split s) const {
  return s == Split::kTrain ? train : (s == Split::kVal ? val : test);
}

std::vector<cdouble> generate_packet(const DatasetManifest& m, int device, Split split, int index) {
  if (device < 0 || device >= m.n_devices) throw std::invalid_argument("device out of range");
  if (m.profiles.size() != static_cast<std::size_t>(m.n_devices)) {
    throw std::invalid_argument("manifest has no device profiles");
  }
  const preamble::PreambleSpec spec = m.preamble_spec();
  ComplexSignal sig = impairments::apply_device(preamble::generate_preamble(spec),
                                                m.profiles[static_cast<std::size_t>(device)]);
  Rng rng = make_rng({m.master_seed, Stream::kNoise, static_cast<std::uint64_t>(device),
                      static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(index)});
  confounders::add_awgn_inplace(sig.samples, m.snr_db, rng);
  preamble::normalize_power_inplace(sig.samples);
  return std::move(sig.samples);
}

Dataset generate_dataset(const DatasetManifest& manifest, int threads) {
  Dataset ds;
  ds.manifest = manifest;
  ds.manifest.files.clear();
  if (ds.manifest.profiles.empty()) {
    ds.manifest.profiles = impairments::assign_profiles(manifest.n_devices, manifest.master_seed);
  }
  validate(ds.manifest);
  const DatasetManifest& m = ds.manifest;
  const std::size_t len = m.preamble_spec().length();

  for (Split split : kSplits) {
    PacketSet& set = ds.split(split);
    const int per = m.per_device(split);
    const std::size_t n = static_cast<std::size_t>(per) * m.n_devices;
    set.packet_length = len;
    set.samples.resize(n * len);
    set.labels.resize(n);
    detail::parallel_for(n, threads, [&](std::size_t i) {
      const int device = static_cast<int>(i / static_cast<std::size_t>(per));
      const int index = static_cast<int>(i % static_cast<std::size_t>(per));
      const auto x = generate_packet(m, device, split, index);
      to_float(x, std::span<cfloat>(set.samples.data() + i * len, len));
      set.labels[i] = device;
    });
  }
  return ds;
}

// Binary: magic, u64 count, u64 length, then count*length interleaved
// little-endian float32 (I, Q) pairs. Sidecar JSON next to it.
void save_packets(const PacketSet& set, const std::string& path) {
  if (set.samples.size() != set.size() * set.packet_length) throw std::invalid_argument("malformed packet set");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const std::uint64_t hdr[2] = {set.size(), set.packet_length};
  os.write(kPacketMagic, sizeof kPacketMagic);
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  os.write(reinterpret_cast<const char*>(set.samples.data()),
           static_cast<std::streamsize>(set.samples.size() * sizeof(cfloat)));
  if (!os) throw IoError("failed writing " + path);
  write_text(path + ".json", json{{"count", set.size()}, {"length", set.packet_length}, {"labels", set.labels}}.dump());
}

namespace {

PacketSet read_packet_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kPacketMagic, sizeof magic) != 0) {
    throw FormatError(path + ": bad magic bytes");
  }
  std::uint64_t hdr[2];
  if (!is.read(reinterpret_cast<char*>(hdr), sizeof hdr)) throw FormatError(path + ": truncated header");
  const std::uint64_t expected = hdr[0] * hdr[1] * sizeof(cfloat);
  is.seekg(0, std::ios::end);
  const auto total = static_cast<std::uint64_t>(is.tellg());
  if (total != sizeof kPacketMagic + sizeof hdr + expected) throw FormatError(path + ": size does not match header");
  is.seekg(static_cast<std::streamoff>(sizeof kPacketMagic + sizeof hdr));
  PacketSet set;
  set.packet_length = hdr[1];
  set.samples.resize(hdr[0] * hdr[1]);
  if (!is.read(reinterpret_cast<char*>(set.samples.data()), static_cast<std::streamsize>(expected))) {
    throw FormatError(path + ": truncated samples");
  }
  set.labels.assign(hdr[0], 0);
  return set;
}

std::vector<int> read_labels(const json& side, std::size_t count, const std::string& path) {
  try {
    auto labels = side.at("labels").get<std::vector<int>>();
    if (labels.size() != count) throw FormatError(path + ": label count does not match samples");
    return labels;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace

PacketSet load_packets(const std::string& path) {
  PacketSet set = read_packet_binary(path);
  const json side = parse_json(read_text(path + ".json"), "sidecar " + path + ".json");
  set.labels = read_labels(side, set.size(), path + ".json");
  return set;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  DatasetManifest m = ds.manifest;
  m.files.clear();
  const std::string hash = manifest_hash(m);
  const json manifest_fields = generating_fields(m);
  for (Split split : kSplits) {
    const PacketSet& set = ds.split(split);
    const std::string name = to_string(split);
    const std::string bin = (fs::path(dir) / (name + ".bin")).string();
    save_packets(set, bin);
    // Richer sidecar replaces the plain one written by save_packets.
    json keys = json::array();
    const int per = m.per_device(split);
    for (std::size_t i = 0; i < set.size(); ++i) {
      keys.push_back({m.master_seed, static_cast<int>(Stream::kNoise), set.labels[i], static_cast<int>(split),
                      per > 0 ? static_cast<int>(i % static_cast<std::size_t>(per)) : 0});
    }
    json side = {{"split", name},
                 {"count", set.size()},
                 {"length", set.packet_length},
                 {"labels", set.labels},
                 {"rng_keys", keys},
                 {"rng_key_fields", {"master_seed", "purpose", "device", "split", "packet"}},
                 {"manifest", manifest_fields},
                 {"manifest_hash", hash}};
    write_text(bin + ".json", side.dump());
    m.files.emplace_back(name, name + ".bin");
  }
  write_text((fs::path(dir) / "manifest.json").string(), manifest_to_json(m));
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  const json mj = parse_json(read_text(manifest_path), "manifest");
  ds.manifest = manifest_from_json(mj.dump());
  const std::string hash = manifest_hash(ds.manifest);
  if (mj.contains("manifest_hash") && mj["manifest_hash"] != hash) {
    ds.warnings.push_back("manifest hash mismatch in manifest.json");
  }
  if (ds.manifest.profiles.size() != static_cast<std::size_t>(ds.manifest.n_devices)) {
    throw FormatError("manifest lacks device profiles");
  }
  for (Split split : kSplits) {
    const std::string name = to_string(split);
    std::string file = name + ".bin";
    for (const auto& [k, v] : ds.manifest.files) {
      if (k == name) file = v;
    }
    const std::string bin = (fs::path(dir) / file).string();
    PacketSet set = read_packet_binary(bin);
    const json side = parse_json(read_text(bin + ".json"), "sidecar " + bin + ".json");
    set.labels = read_labels(side, set.size(), bin + ".json");
    if (side.value("manifest_hash", std::string()) != hash) {
      ds.warnings.push_back("manifest hash mismatch for split " + name);
    }
    const std::size_t expected = static_cast<std::size_t>(ds.manifest.per_device(split)) * ds.manifest.n_devices;
    if (set.size() != expected) throw FormatError("split " + name + " has an unexpected packet count");
    if (set.size() > 0 && set.packet_length != ds.manifest.preamble_spec().length()) {
      throw FormatError("split " + name + " has an unexpected packet length");
    }
    for (int y : set.labels) {
      if (y < 0 || y >= ds.manifest.n_devices) throw FormatError("split " + name + " has an out-of-range label");
    }
    set.packet_length = ds.manifest.preamble_spec().length();
    ds.split(split) = std::move(set);
  }
  return ds;
}

}  // namespace rfp::harness
