#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tebounds {

/// Error raised by every module. `code()` is a stable tag suitable for
/// machine-readable reporting; `what()` carries the human-readable text.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace tebounds
