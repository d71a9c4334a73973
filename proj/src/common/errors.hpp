#pragma once

#include <stdexcept>
#include <string>

namespace dpa {

// Maps one-to-one onto the C API status codes and the CLI exit codes.
enum class ErrorCode {
  kInvalidArgument,
  kConfig,
  kNumeric,
  kIo,
};

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

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace dpa
