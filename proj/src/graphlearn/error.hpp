#pragma once

#include <stdexcept>
#include <string>

namespace graphlearn {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Io,
  Parse,
  Degenerate,
  Numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace graphlearn
