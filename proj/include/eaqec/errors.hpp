#pragma once

#include <stdexcept>
#include <string>

namespace eaqec {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition on an argument (Hermiticity, diagonality, completeness) was not met.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Out-of-range or non-finite user input.
class InputError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Raised when |C| is so close to 1 that the channel is a single unitary and
/// there is nothing to correct. Callers should treat the channel as identity.
class DegenerateChannelError : public Error {
public:
    using Error::Error;
};

/// An internal consistency check failed; signals a construction bug rather than bad input.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Mixed-environment routines called with w in {0, 1}.
class PureEnvironmentError : public Error {
public:
    using Error::Error;
};

}  // namespace eaqec
