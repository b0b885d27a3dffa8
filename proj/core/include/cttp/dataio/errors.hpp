#pragma once

#include "cttp/error.hpp"

namespace cttp::io {

class TruncatedFileError : public DataError {
public:
    using DataError::DataError;
};

class BadMagicError : public DataError {
public:
    using DataError::DataError;
};

class CountMismatchError : public DataError {
public:
    using DataError::DataError;
};

class ChecksumError : public DataError {
public:
    using DataError::DataError;
};

class DuplicateNameError : public DataError {
public:
    using DataError::DataError;
};

} // namespace cttp::io
