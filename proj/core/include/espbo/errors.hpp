#pragma once

#include <stdexcept>
#include <string>

namespace espbo {

// Thrown when a linear-algebra step cannot be stabilized (e.g. a Cholesky
// factorization that still fails after the jitter ladder is exhausted).
// Invalid arguments and malformed inputs throw std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace espbo
