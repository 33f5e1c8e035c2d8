#pragma once

#include <stdexcept>

namespace emvb {

/// Raised for malformed inputs, inconsistent index files and violated
/// preconditions at API boundaries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emvb
