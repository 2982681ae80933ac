#pragma once

#include <stdexcept>
#include <string>

namespace demandirl {

/// Raised when input data (CSV corpora, config files, plan lists) is
/// malformed or violates a documented invariant.  CLI maps this to exit
/// code 1.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine cannot produce a trustworthy result
/// (non-integrable posterior, quadrature failure, optimizer breakdown).
/// CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace demandirl
