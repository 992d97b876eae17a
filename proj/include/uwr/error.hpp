#pragma once

#include <stdexcept>
#include <string>

namespace uwr {

/// Raised when a config or argument fails validation before any side effect.
/// The CLI maps this to exit code 1; all other exceptions map to 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uwr
