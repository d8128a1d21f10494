#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssnu {

using Real = double;
using Complex = std::complex<double>;

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid field data (non-finite values, wrong size, ...).
struct FieldError : Error {
    using Error::Error;
};

/// Two objects that must share a grid do not.
struct GridMismatch : Error {
    using Error::Error;
};

/// A stability or resolution constraint is violated.
struct StabilityError : Error {
    using Error::Error;
};

/// An iterative method failed to converge; carries the best residual seen.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, Real best)
        : Error(msg), best_residual(best) {}
    Real best_residual;
};

inline constexpr Real pi = 3.14159265358979323846;

}  // namespace ssnu
