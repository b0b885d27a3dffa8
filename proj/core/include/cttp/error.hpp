#pragma once

#include <stdexcept>
#include <string>

namespace cttp {

// Root of every error the library throws. The CLI maps the three families
// below onto distinct process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite values, failed convergence, shape mismatches inside the engine.
class NumericError : public Error {
public:
    using Error::Error;
};

class ShapeError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace cttp
