#pragma once

#include <stdexcept>

namespace tmerton {

// Bad inputs: malformed files, parameters outside their domain, violated
// preconditions. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failures: non-convergence, unattainable target prices,
// statistical rejection, degenerate parameters discovered mid-computation.
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tmerton
