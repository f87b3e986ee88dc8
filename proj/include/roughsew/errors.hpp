#pragma once

#include <stdexcept>
#include <string>

namespace roughsew {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension/depth mismatch or malformed argument.
class StructuralError : public Error {
public:
    using Error::Error;
};

// A requested operation needs data the inputs cannot supply
// (depth-3 signature from a depth-2 driver, a missing derivative provider).
class CapabilityError : public Error {
public:
    using Error::Error;
};

// A hypothesis of a lemma fails for the given inputs, e.g. the horizon is
// too large for the Davie recursion or a step is not a contraction.
class HypothesisError : public Error {
public:
    using Error::Error;
};

// Iterated products did not settle before the maximal level.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// An ODE sub-integration produced non-finite values.
class IntegratorError : public Error {
public:
    using Error::Error;
};

}  // namespace roughsew
