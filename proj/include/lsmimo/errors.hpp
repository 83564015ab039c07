#pragma once

#include <stdexcept>
#include <string>

namespace lsmimo {

// Raised when an iterative numeric routine cannot reach its tolerance
// (series cap, quadrature subdivision cap, excess skipped realizations).
// CLI maps this to exit code 1; config/usage problems throw
// std::invalid_argument and map to exit code 2.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lsmimo
