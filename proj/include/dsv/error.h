// dsv/error.h

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

#ifndef DSV_ERROR_H_
#define DSV_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsv {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kWaveformTooShort,
  kInvalidConfig,
  kFormat,
  kIo,
  kNoValidPath,
  kEmptyState,
  kUnknownId,
  kVersionMismatch,
  kFingerprintMismatch,
  kNumerical,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

namespace internal {

// Collects a message with operator<< and throws on destruction, in the style
// of KALDI_ERR.
class ErrorStream {
 public:
  explicit ErrorStream(ErrorCode code) : code_(code) {}
  template <typename T>
  ErrorStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }
  [[noreturn]] ~ErrorStream() noexcept(false) { throw Error(code_, os_.str()); }

 private:
  ErrorCode code_;
  std::ostringstream os_;
};

}  // namespace internal

#define DSV_ERR(code) ::dsv::internal::ErrorStream(::dsv::ErrorCode::code)

#define DSV_CHECK(cond, code)                                          \
  if (cond) {                                                          \
  } else                                                               \
    DSV_ERR(code) << "check failed: " #cond " "

}  // namespace dsv

#endif  // DSV_ERROR_H_
