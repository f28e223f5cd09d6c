#pragma once

#include <stdexcept>
#include <string>

namespace jsr {

/// A solver produced a non-finite value; the iteration is abandoned.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jsr
