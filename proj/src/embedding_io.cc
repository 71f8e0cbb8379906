// src/embedding_io.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "prosody/embedding_io.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include "prosody/error.h"
#include "prosody/json_lines.h"

namespace prosody {

using nlohmann::json;

void ValidateSamples(std::span<const ProsodySample> samples) {
  if (samples.empty()) return;
  const Eigen::Index dim = samples.front().embedding.size();
  std::unordered_set<std::string> tokens;
  for (const auto &s : samples) {
    if (s.embedding.size() != dim)
      throw DimensionError("token '" + s.token_id + "' has dimension " +
                           std::to_string(s.embedding.size()) + ", expected " +
                           std::to_string(dim));
    if (!s.embedding.allFinite())
      throw ValidationError("token '" + s.token_id +
                            "' has a non-finite embedding component");
    if (!tokens.insert(s.token_id).second)
      throw ValidationError("duplicate token id '" + s.token_id + "'");
  }
}

std::vector<ProsodySample> ReadEmbeddingsJsonl(std::istream &is) {
  std::vector<ProsodySample> samples;
  ForEachJsonLine(is, [&](const json &j, std::size_t line) {
    ProsodySample s;
    try {
      s.token_id = j.at("token_id").get<std::string>();
      s.word = j.at("word").get<std::string>();
      auto values = j.at("embedding").get<std::vector<double>>();
      s.embedding = Eigen::Map<const VectorXd>(values.data(),
                                               static_cast<Eigen::Index>(values.size()));
    } catch (const json::exception &e) {
      throw ParseError(std::string("bad embedding record: ") + e.what(), line);
    }
    if (!samples.empty() &&
        s.embedding.size() != samples.front().embedding.size())
      throw ParseError("embedding dimension " +
                           std::to_string(s.embedding.size()) + " differs from " +
                           std::to_string(samples.front().embedding.size()),
                       line);
    samples.push_back(std::move(s));
  });
  ValidateSamples(samples);
  return samples;
}

void WriteEmbeddingsJsonl(std::ostream &os,
                          std::span<const ProsodySample> samples) {
  for (const auto &s : samples) {
    json j;
    j["token_id"] = s.token_id;
    j["word"] = s.word;
    j["embedding"] = std::vector<double>(s.embedding.begin(), s.embedding.end());
    os << j.dump() << '\n';
  }
}

namespace {

// Reads exactly n bytes or reports whether the stream ended cleanly before
// the first byte.
enum class ReadStatus { kOk, kEof, kTruncated };

ReadStatus ReadBytes(std::istream &is, char *out, std::size_t n) {
  is.read(out, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got == n) return ReadStatus::kOk;
  return got == 0 ? ReadStatus::kEof : ReadStatus::kTruncated;
}

template <typename UInt>
UInt DecodeLE(const unsigned char *p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

template <typename UInt>
void EncodeLE(std::ostream &os, UInt v) {
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt ReadLE(std::istream &is, std::size_t record, bool allow_eof, bool *eof) {
  unsigned char buf[sizeof(UInt)];
  switch (ReadBytes(is, reinterpret_cast<char *>(buf), sizeof(UInt))) {
    case ReadStatus::kOk:
      return DecodeLE<UInt>(buf);
    case ReadStatus::kEof:
      if (allow_eof) {
        *eof = true;
        return 0;
      }
      [[fallthrough]];
    case ReadStatus::kTruncated:
      break;
  }
  throw ParseError("truncated binary embedding record " +
                   std::to_string(record));
}

std::string ReadString(std::istream &is, std::size_t len, std::size_t record) {
  std::string s(len, '\0');
  if (len > 0 && ReadBytes(is, s.data(), len) != ReadStatus::kOk)
    throw ParseError("truncated binary embedding record " +
                     std::to_string(record));
  return s;
}

void WriteString(std::ostream &os, const std::string &s) {
  if (s.size() > 0xFFFF)
    throw ValidationError("string too long for binary embedding file: '" +
                          s.substr(0, 32) + "...'");
  EncodeLE<std::uint16_t>(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

std::vector<ProsodySample> ReadEmbeddingsBinary(std::istream &is) {
  char magic[4];
  if (ReadBytes(is, magic, 4) != ReadStatus::kOk ||
      std::memcmp(magic, kBinaryEmbeddingMagic, 4) != 0)
    throw ParseError("missing PTE1 magic in binary embedding file");
  bool eof = false;
  const auto dim = ReadLE<std::uint32_t>(is, 0, false, &eof);
  if (dim == 0) throw ParseError("binary embedding file declares d = 0");
  std::vector<ProsodySample> samples;
  std::vector<unsigned char> buf(4 * static_cast<std::size_t>(dim));
  for (std::size_t record = 1;; ++record) {
    const auto word_len = ReadLE<std::uint16_t>(is, record, true, &eof);
    if (eof) break;
    ProsodySample s;
    s.word = ReadString(is, word_len, record);
    const auto token_len = ReadLE<std::uint16_t>(is, record, false, &eof);
    s.token_id = ReadString(is, token_len, record);
    if (ReadBytes(is, reinterpret_cast<char *>(buf.data()), buf.size()) !=
        ReadStatus::kOk)
      throw ParseError("truncated binary embedding record " +
                       std::to_string(record));
    s.embedding.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j)
      s.embedding[j] = std::bit_cast<float>(DecodeLE<std::uint32_t>(&buf[4 * j]));
    samples.push_back(std::move(s));
  }
  ValidateSamples(samples);
  return samples;
}

void WriteEmbeddingsBinary(std::ostream &os,
                           std::span<const ProsodySample> samples) {
  ValidateSamples(samples);
  const std::uint32_t dim =
      samples.empty() ? 1u : static_cast<std::uint32_t>(samples.front().embedding.size());
  os.write(kBinaryEmbeddingMagic, 4);
  EncodeLE<std::uint32_t>(os, dim);
  for (const auto &s : samples) {
    WriteString(os, s.word);
    WriteString(os, s.token_id);
    for (Eigen::Index j = 0; j < s.embedding.size(); ++j)
      EncodeLE<std::uint32_t>(
          os, std::bit_cast<std::uint32_t>(static_cast<float>(s.embedding[j])));
  }
}

std::vector<ProsodySample> ReadEmbeddings(std::istream &is) {
  char head[4] = {0, 0, 0, 0};
  is.read(head, 4);
  const auto got = is.gcount();
  is.clear();
  is.seekg(0);
  if (got == 4 && std::memcmp(head, kBinaryEmbeddingMagic, 4) == 0)
    return ReadEmbeddingsBinary(is);
  return ReadEmbeddingsJsonl(is);
}

}  // namespace prosody
