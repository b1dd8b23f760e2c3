#pragma once

#include <stdexcept>
#include <string>

namespace conemt {

// Every failure raised by the library derives from Error so callers can
// separate numeric trouble from programming mistakes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class SolverError : public Error { using Error::Error; };
class ResolutionError : public Error { using Error::Error; };
class SupportOverflow : public Error { using Error::Error; };
class FileError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

// Largest exponent handed to std::exp before we call it an overflow.
inline constexpr double exp_guard = 700.0;

}  // namespace conemt
