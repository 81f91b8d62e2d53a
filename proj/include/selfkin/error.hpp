#pragma once

#include <stdexcept>
#include <string>

namespace selfkin {

/// Failure carrying a stable machine-readable identifier such as
/// "shape-mismatch" or "unknown-relation". what() adds optional detail in
/// parentheses, e.g. "unknown-relation(3)".
class Error : public std::runtime_error {
 public:
  explicit Error(std::string code)
      : std::runtime_error(code), code_(std::move(code)) {}
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + "(" + detail + ")"), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace selfkin
