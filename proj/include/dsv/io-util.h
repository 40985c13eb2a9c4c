// dsv/io-util.h

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

#ifndef DSV_IO_UTIL_H_
#define DSV_IO_UTIL_H_

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dsv {

// Little-endian scalar I/O. Reads throw Error(kFormat) on a short read.
void WriteU32(std::ostream &os, uint32_t v);
void WriteF32(std::ostream &os, float v);
uint32_t ReadU32(std::istream &is);
float ReadF32(std::istream &is);
void WriteMagic(std::ostream &os, std::string_view magic);
void ExpectMagic(std::istream &is, std::string_view magic);

std::ifstream OpenInput(const std::string &path, bool binary = false);
std::ofstream OpenOutput(const std::string &path, bool binary = false);

std::string ReadFileToString(const std::string &path);
void WriteStringToFile(const std::string &path, std::string_view contents);

std::vector<std::string> SplitString(std::string_view s, char delim);
std::string Trim(std::string_view s);

/// FNV-1a, 64 bit. Used for configuration fingerprints.
uint64_t Fnv1a64(std::string_view data);

}  // namespace dsv

#endif  // DSV_IO_UTIL_H_
