#pragma once

#include <stdexcept>
#include <string>

namespace fbdyn {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, inconsistent dimensions, invalid configs.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failure at run time (divergence, eigen-solver breakdown).
// The CLI maps these to exit code 1.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The log-rotation reached the cot(theta/2) singularity neighborhood and
// must be folded into the base rotation before continuing.
class RebaseRequired : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fbdyn
