#pragma once

#include <stdexcept>
#include <string>

namespace spectronet {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or violated preconditions. CLI exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed files, grid mismatches, non-finite values. CLI exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

/// Unreadable or incompatible checkpoint files. CLI exit code 3.
class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

/// Training produced a non-finite loss. CLI exit code 4.
class DivergedError : public Error {
public:
    using Error::Error;
};

} // namespace spectronet
