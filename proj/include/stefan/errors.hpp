#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

// Numerical failures: a solver ran and could not produce a trustworthy
// answer.  These map to exit code 2 in the CLI.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NewtonStalled : NumericalError {
    using NumericalError::NumericalError;
};

struct NotConverged : NumericalError {
    using NumericalError::NumericalError;
};

// Raised by the time stepper when a step produced a nonpositive interior
// value or a nonpositive front speed; the driver halves dt and retries.
struct StepRejected : NumericalError {
    using NumericalError::NumericalError;
};

// Semi-wave truncation did not hold its far-field plateau.
struct TruncationTooShort : NumericalError {
    TruncationTooShort(const std::string& what, double l_trunc)
        : NumericalError(what), l_trunc(l_trunc) {}
    double l_trunc;
};

// Domain errors: the request itself is outside the regime the answer lives
// in (bad bracket, ambiguous threshold).  Exit code 1 in the CLI.
struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BracketInvalid : DomainFailure {
    BracketInvalid(const std::string& what, double lo, double hi)
        : DomainFailure(what), lo(lo), hi(hi) {}
    double lo;
    double hi;
};

// A fit or averaging window holds too few samples to be meaningful.
struct WindowTooShort : DomainFailure {
    using DomainFailure::DomainFailure;
};

}  // namespace stefan
