#pragma once

#include <stdexcept>
#include <string>

namespace fk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: config keys, grid sizes, out-of-range parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller broke a precondition (grid mismatch, off-shell quadruple).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Mathematically unattainable request, e.g. (rho, e) outside the FD family.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

// Non-finite values showed up where they should not.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

}  // namespace fk
