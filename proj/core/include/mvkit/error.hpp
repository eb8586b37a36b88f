#pragma once

#include <stdexcept>
#include <string>

namespace mvkit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: parse failures, invariant violations,
// shape mismatches, degenerate geometry. The CLI maps this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

// Numerical failure: training divergence, failed gradient verification.
// The CLI maps this to exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace mvkit
