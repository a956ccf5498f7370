#pragma once

#include <stdexcept>
#include <string>

namespace softmention {

enum class ErrorKind {
  Config,     // bad configuration or usage
  Data,       // malformed corpus / sidecar / fixture content
  Transport,  // retries exhausted or transport-level failure
  Parse,      // unusable model response
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace softmention
