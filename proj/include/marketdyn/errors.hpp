#pragma once

#include <stdexcept>

namespace marketdyn {

// Violated parameter constraint or precondition. CLI maps this to exit code 2.
struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numeric failure: non-convergence, degenerate transform, non-finite state.
// CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input series too short for the requested analysis.
struct insufficient_data : numeric_error {
    using numeric_error::numeric_error;
};

}  // namespace marketdyn
