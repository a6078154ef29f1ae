#pragma once

#include <stdexcept>

namespace rcsm {

// Caller handed us something malformed: bad dimensions, out-of-range parameter.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A computation left its numerical domain: non-positive-definite input, a pole
// crossing, NaN in an iterate.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rank-1 perturbation whose denominator collapsed; applying it would destroy
// positive definiteness.
struct SingularUpdateError : NumericalError {
    using NumericalError::NumericalError;
};

// Problem size exceeds an enumeration or storage cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Could not write an output file.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rcsm
