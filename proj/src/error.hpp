#pragma once

#include <stdexcept>
#include <string>

namespace hdcal {

// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  InvalidDimension,
  Incompatible,
  EmptyInput,
  InvalidParameter,
  InvalidEnsemble,
  UnsupportedRepr,
  UndefinedSimilarity,
  NumericInput,
  NumericOverflow,
  Diverged,
  InvalidState,
  InvalidDataset,
  Io,
  Parse,
  Format,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hdcal
