#ifndef TPE_ERROR_HPP
#define TPE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tpe {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses exist so tests and the
// service layer can react to specific conditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class ParamsMismatch : public Error {
public:
    using Error::Error;
};

class NotBinary : public Error {
public:
    using Error::Error;
};

// Truncated, oversized or otherwise undecodable byte streams.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace tpe

#endif // TPE_ERROR_HPP
