#pragma once

#include <stdexcept>
#include <string>

namespace chaingraph {

/// Malformed arguments: wrong shapes, out-of-range indices, asymmetric inputs.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical precondition failed (singular or indefinite matrix).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chaingraph
