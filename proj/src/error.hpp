#pragma once

#include <stdexcept>
#include <string>

namespace gridbench {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kValidation = 4,
  kState = 5,
  kProtocol = 6,
};

// All recoverable failures in the core are reported as Error; the C layer maps
// code() onto gb_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gridbench
