#pragma once

#include <stdexcept>
#include <string>

namespace spca {

// Failure categories used across the library. The CLI maps these onto exit
// codes, so keep the set small and stable.
enum class ErrorCode {
  InvalidInput,
  ZeroMatrix,
  InfeasibleSparsity,
  CapacityExceeded,
  ParseError,
  InternalInvariantViolation,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// Internal consistency check. Unlike assert() this stays active in release
// builds; invariant breakage must surface as a reportable error, not UB.
inline void require_invariant(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InternalInvariantViolation, what);
}

const char* error_code_name(ErrorCode code);

}  // namespace spca
