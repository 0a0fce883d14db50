#pragma once

#include <stdexcept>

namespace gasdrift {

/// Numeric failure (diverged optimization, non-finite results) as opposed
/// to invalid input; the CLI maps this to its own exit code.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gasdrift
