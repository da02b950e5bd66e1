#pragma once

#include <stdexcept>
#include <string>

namespace seed {

// Error taxonomy used across the library. The CLI maps these to exit codes:
// validation -> 2, I/O and format -> 3, internal invariant -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs that violate a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures: missing files, short writes, permission problems.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed byte streams: bad magic, truncated payload, unparsable text.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

/// Non-finite or otherwise unusable values inside an otherwise well-formed file.
class DataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A broken internal invariant; always a bug, never a user error.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace seed
