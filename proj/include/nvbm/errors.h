// Copyright nvbm contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#ifndef NVBM_ERRORS_H_
#define NVBM_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvbm {

// Base of every error raised by the toolchain. `line()` is the 1-based
// source line for text-format errors and 0 when not applicable.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

#define NVBM_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

NVBM_DEFINE_ERROR(MalformedTransactionLine);
NVBM_DEFINE_ERROR(PayloadLengthError);
NVBM_DEFINE_ERROR(ConfigSyntaxError);
NVBM_DEFINE_ERROR(MapConfigError);
NVBM_DEFINE_ERROR(AddressOutOfWindow);
NVBM_DEFINE_ERROR(ImmediateOutOfRange);
NVBM_DEFINE_ERROR(InvalidRegister);
NVBM_DEFINE_ERROR(UnknownMnemonic);
NVBM_DEFINE_ERROR(UndefinedLabel);
NVBM_DEFINE_ERROR(DuplicateLabel);
NVBM_DEFINE_ERROR(AsmSyntaxError);
NVBM_DEFINE_ERROR(UndecodableWord);
NVBM_DEFINE_ERROR(MemFormatError);

#undef NVBM_DEFINE_ERROR

}  // namespace nvbm

#endif  // NVBM_ERRORS_H_
