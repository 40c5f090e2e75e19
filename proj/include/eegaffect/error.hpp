#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace eegaffect {

// Typed failure carrying a stable machine-readable code alongside the human
// message. The CLI prints failures as "error_code=<code> <message>" and maps
// codes to exit status, so codes must stay stable across releases.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace eegaffect
