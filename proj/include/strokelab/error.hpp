#pragma once

#include <stdexcept>
#include <string>

namespace strokelab {

enum class ErrorKind {
  Config,        // invalid configuration or CLI arguments
  Contract,      // violated precondition (shape mismatch, bad index, ...)
  Io,            // file system or format problems
  Numerical,     // NaN / inf / degenerate division
  Verification,  // an identity or acceptance check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit status for an error class. 0 is reserved for success.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Numerical: return 4;
    case ErrorKind::Verification: return 5;
    case ErrorKind::Contract: return 6;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace strokelab
