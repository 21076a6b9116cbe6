#pragma once

#include <stdexcept>
#include <string>

namespace cogniprof {

enum class ErrorCode {
  io,
  parse,
  validation,
  lookup,
  argument,
  version,
  checksum,
  state,
  numeric,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace cogniprof
