#pragma once

#include <stdexcept>
#include <string>

namespace mapalign {

// Failure categories surfaced by the library. The CLI maps each one to a
// distinct process exit code.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kNoTraits = 3,
  kNoFaces = 4,
  kEmptyPool = 5,
  kDegenerate = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mapalign
