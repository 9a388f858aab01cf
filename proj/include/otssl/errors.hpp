#pragma once

#include <stdexcept>
#include <string>

namespace otssl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (shapes, finiteness, weights).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Exp-domain scaling left the representable range and the caller disabled
/// the log-domain fallback.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class UnsupportedSize : public Error {
public:
    using Error::Error;
};

/// CSV ingestion failed; the message names the offending row and/or column.
class IngestionError : public Error {
public:
    using Error::Error;
};

class InfeasibleSplit : public Error {
public:
    using Error::Error;
};

class OutputError : public Error {
public:
    using Error::Error;
};

}  // namespace otssl
