// io-util.cc

// Copyright 2026  The dsv authors

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

#include "dsv/io-util.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "dsv/error.h"

namespace dsv {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kWaveformTooShort: return "waveform too short";
    case ErrorCode::kInvalidConfig: return "invalid config";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kNoValidPath: return "no valid path";
    case ErrorCode::kEmptyState: return "empty state";
    case ErrorCode::kUnknownId: return "unknown id";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kFingerprintMismatch: return "fingerprint mismatch";
    case ErrorCode::kNumerical: return "numerical error";
  }
  return "error";
}

namespace {

template <typename T>
void WriteLe(std::ostream &os, T v) {
  static_assert(sizeof(T) == 4);
  uint32_t bits = std::bit_cast<uint32_t>(v);
  unsigned char buf[4] = {
      static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
      static_cast<unsigned char>(bits >> 16),
      static_cast<unsigned char>(bits >> 24)};
  os.write(reinterpret_cast<const char *>(buf), 4);
  if (!os) DSV_ERR(kIo) << "write failed";
}

uint32_t ReadLe32(std::istream &is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char *>(buf), 4);
  if (is.gcount() != 4) DSV_ERR(kFormat) << "truncated payload";
  return static_cast<uint32_t>(buf[0]) | (static_cast<uint32_t>(buf[1]) << 8) |
         (static_cast<uint32_t>(buf[2]) << 16) |
         (static_cast<uint32_t>(buf[3]) << 24);
}

}  // namespace

void WriteU32(std::ostream &os, uint32_t v) { WriteLe(os, v); }
void WriteF32(std::ostream &os, float v) { WriteLe(os, v); }
uint32_t ReadU32(std::istream &is) { return ReadLe32(is); }
float ReadF32(std::istream &is) { return std::bit_cast<float>(ReadLe32(is)); }

void WriteMagic(std::ostream &os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void ExpectMagic(std::istream &is, std::string_view magic) {
  std::string buf(magic.size(), '\0');
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(magic.size()) || buf != magic)
    DSV_ERR(kFormat) << "bad magic, expected \"" << magic << "\"";
}

std::ifstream OpenInput(const std::string &path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) DSV_ERR(kIo) << "cannot open " << path << " for reading";
  return is;
}

std::ofstream OpenOutput(const std::string &path, bool binary) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) DSV_ERR(kIo) << "cannot open " << path << " for writing";
  return os;
}

std::string ReadFileToString(const std::string &path) {
  std::ifstream is = OpenInput(path, true);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteStringToFile(const std::string &path, std::string_view contents) {
  std::ofstream os = OpenOutput(path, true);
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!os) DSV_ERR(kIo) << "write to " << path << " failed";
}

std::vector<std::string> SplitString(std::string_view s, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string Trim(std::string_view s) {
  const char *ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace dsv
