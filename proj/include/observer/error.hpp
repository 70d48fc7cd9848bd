#pragma once

#include <stdexcept>
#include <string>

namespace observer {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed a precondition (empty caption, bad dimension, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Raw image bytes or file could not be decoded.
class ImageDecodeError : public Error {
public:
    using Error::Error;
};

/// Persisted artifact is truncated, corrupt, or of another format version.
class FormatError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A remote endpoint could not be reached or the connection broke.
class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace observer
