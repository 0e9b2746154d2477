#pragma once

#include <stdexcept>
#include <string>

namespace hidden_basis {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kConfig = 3,
  kIo = 4,
  kNumerical = 5,
  kDegenerate = 6,
  kNotCertified = 7,
};

// All library failures surface as this exception. The C API maps `code()`
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace hidden_basis
