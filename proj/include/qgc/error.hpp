#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qgc {

enum class ErrorKind {
  Config,      // bad ratio, sigma, flag values
  Template,    // missing or duplicated placeholders
  Alignment,   // token/word offsets that cannot be reconciled
  Validation,  // malformed input files or records
  Provider,    // attention provider or generation endpoint failure
  Timeout,     // generation endpoint timed out
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with "<context>: ".
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

}  // namespace qgc
