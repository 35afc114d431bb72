// Copyright 2026 The MAS Authors.
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

#include "mas/attention_dump.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mas/error.h"

namespace mas {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) |
         ((v & 0x00ff0000u) >> 8) | ((v & 0xff000000u) >> 24);
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes `bytes` next to `path` under a temporary name and renames it over
// `path`, so readers never observe a half-written file.
void write_file_atomic(const fs::path &path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      throw Error(ErrorCode::kIoFailure, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoFailure, "cannot rename into " + path.string());
  }
}

template <typename T>
T manifest_field(const ordered_json &manifest, const char *name,
                 const fs::path &path) {
  auto it = manifest.find(name);
  if (it == manifest.end()) {
    throw Error(ErrorCode::kManifestMismatch,
                path.string() + ": missing field \"" + name + "\"");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception &) {
    throw Error(ErrorCode::kManifestMismatch,
                path.string() + ": field \"" + name + "\" has the wrong type");
  }
}

// Uniform double in (0, 1]. Built directly from the engine's bits so the
// sequence does not depend on the standard library's distributions.
double positive_unit(std::mt19937_64 &rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

AttentionDump read_dump(const fs::path &dir) {
  const fs::path manifest_path = dir / kManifestFile;
  const fs::path tensor_path = dir / kAttentionFile;
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::kMissingFile, manifest_path.string());
  }
  if (!fs::is_regular_file(tensor_path)) {
    throw Error(ErrorCode::kMissingFile, tensor_path.string());
  }

  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kManifestMismatch,
                manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object()) {
    throw Error(ErrorCode::kManifestMismatch,
                manifest_path.string() + ": not a JSON object");
  }

  const auto version =
      manifest_field<std::string>(manifest, "format_version", manifest_path);
  if (version != kDumpFormatVersion) {
    throw Error(ErrorCode::kBadVersion,
                manifest_path.string() + ": format_version \"" + version +
                    "\", expected \"" + std::string(kDumpFormatVersion) + "\"");
  }

  AttentionDump dump;
  dump.example_id =
      manifest_field<std::string>(manifest, "example_id", manifest_path);
  dump.model_name =
      manifest_field<std::string>(manifest, "model_name", manifest_path);
  dump.lowercased = manifest_field<bool>(manifest, "lowercased", manifest_path);
  dump.num_layers =
      manifest_field<std::size_t>(manifest, "num_layers", manifest_path);
  dump.num_heads =
      manifest_field<std::size_t>(manifest, "num_heads", manifest_path);
  dump.tokens = manifest_field<std::vector<std::string>>(manifest, "tokens",
                                                         manifest_path);

  const std::string bytes = read_file(tensor_path);
  const std::size_t expected_bytes = dump.expected_size() * sizeof(float);
  if (bytes.size() != expected_bytes) {
    std::ostringstream msg;
    msg << tensor_path.string() << ": " << bytes.size()
        << " bytes, manifest declares " << dump.num_layers << "x"
        << dump.num_heads << "x" << dump.token_count() << "x"
        << dump.token_count() << " floats (" << expected_bytes << " bytes)";
    throw Error(ErrorCode::kManifestMismatch, msg.str());
  }

  dump.attention.resize(dump.expected_size());
  std::memcpy(dump.attention.data(), bytes.data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (float &v : dump.attention) {
      v = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(v)));
    }
  }
  return dump;
}

void write_dump(const AttentionDump &dump, const fs::path &dir) {
  if (dump.attention.size() != dump.expected_size()) {
    throw Error(ErrorCode::kManifestMismatch,
                "tensor holds " + std::to_string(dump.attention.size()) +
                    " floats, shape requires " +
                    std::to_string(dump.expected_size()));
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string());
  }

  std::string bytes(dump.attention.size() * sizeof(float), '\0');
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(bytes.data(), dump.attention.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < dump.attention.size(); ++i) {
      const std::uint32_t v =
          byteswap32(std::bit_cast<std::uint32_t>(dump.attention[i]));
      std::memcpy(bytes.data() + i * sizeof(float), &v, sizeof(v));
    }
  }

  ordered_json manifest;
  manifest["format_version"] = kDumpFormatVersion;
  manifest["example_id"] = dump.example_id;
  manifest["model_name"] = dump.model_name;
  manifest["lowercased"] = dump.lowercased;
  manifest["num_layers"] = dump.num_layers;
  manifest["num_heads"] = dump.num_heads;
  manifest["tokens"] = dump.tokens;

  // Tensor first: a manifest only ever describes a complete tensor.
  write_file_atomic(dir / kAttentionFile, bytes);
  write_file_atomic(dir / kManifestFile, manifest.dump(2) + "\n");
}

ValidationReport validate(const AttentionDump &dump) {
  using Kind = ValidationFinding::Kind;
  ValidationReport report;
  const std::size_t t = dump.token_count();

  if (dump.num_layers < 1 || dump.num_heads < 1 || t < 3) {
    std::ostringstream msg;
    msg << "shape L=" << dump.num_layers << " H=" << dump.num_heads
        << " T=" << t << " (need L >= 1, H >= 1, T >= 3)";
    report.findings.push_back({Kind::kShape, 0, 0, 0, 0, 0.0, msg.str()});
  }
  if (dump.attention.size() != dump.expected_size()) {
    std::ostringstream msg;
    msg << "tensor holds " << dump.attention.size() << " values, "
        << dump.num_layers << "x" << dump.num_heads << "x" << t << "x" << t
        << " requires " << dump.expected_size();
    report.findings.push_back({Kind::kShape, 0, 0, 0, 0, 0.0, msg.str()});
    return report;
  }

  for (std::size_t l = 0; l < dump.num_layers; ++l) {
    for (std::size_t h = 0; h < dump.num_heads; ++h) {
      for (std::size_t q = 0; q < t; ++q) {
        const auto row = dump.row(l, h, q);
        double sum = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
          const double v = row[k];
          sum += v;
          if (v < 0.0) {
            std::ostringstream msg;
            msg << "negative entry " << v << " at layer " << l << " head "
                << h << " query " << q << " key " << k;
            report.findings.push_back(
                {Kind::kNegativeEntry, l, h, q, k, v, msg.str()});
          }
        }
        // Written so that NaN sums are reported too.
        if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
          std::ostringstream msg;
          msg << "row sum " << sum << " at layer " << l << " head " << h
              << " query " << q;
          report.findings.push_back({Kind::kRowSum, l, h, q, 0, sum, msg.str()});
        }
      }
    }
  }
  return report;
}

AttentionDump synth_dump(std::vector<std::string> tokens,
                         std::size_t num_layers, std::size_t num_heads,
                         std::size_t reference_index, std::size_t winner_index,
                         double boost, std::uint64_t seed) {
  const std::size_t t = tokens.size();
  if (num_layers < 1 || num_heads < 1 || t < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic dump needs L >= 1, H >= 1 and at least 3 tokens");
  }
  if (reference_index >= t || winner_index >= t) {
    throw Error(ErrorCode::kBadIndex,
                "reference " + std::to_string(reference_index) + " / winner " +
                    std::to_string(winner_index) + " out of range for " +
                    std::to_string(t) + " tokens");
  }
  if (!(boost >= 0.0 && boost <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "boost must lie in [0, 1]");
  }

  AttentionDump dump;
  dump.example_id = "synthetic";
  dump.model_name = "synthetic";
  dump.lowercased = true;
  dump.num_layers = num_layers;
  dump.num_heads = num_heads;
  dump.tokens = std::move(tokens);
  dump.attention.resize(dump.expected_size());

  std::mt19937_64 rng(seed);
  std::vector<double> row(t);
  for (std::size_t l = 0; l < num_layers; ++l) {
    for (std::size_t h = 0; h < num_heads; ++h) {
      for (std::size_t q = 0; q < t; ++q) {
        double sum = 0.0;
        for (double &v : row) {
          v = positive_unit(rng);
          sum += v;
        }
        for (double &v : row) v /= sum;
        if (q == reference_index) {
          for (std::size_t k = 0; k < t; ++k) {
            row[k] = (1.0 - boost) * row[k] + (k == winner_index ? boost : 0.0);
          }
        }
        float *out = dump.attention.data() + dump.offset(l, h, q, 0);
        for (std::size_t k = 0; k < t; ++k) out[k] = static_cast<float>(row[k]);
      }
    }
  }
  return dump;
}

}  // namespace mas
