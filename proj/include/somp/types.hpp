#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace somp {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error taxonomy. Everything user-facing derives from Error so callers can
// catch one type at the CLI boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct DegenerateDictionaryError : Error {
    using Error::Error;
};
struct IllConditionedError : Error {
    using Error::Error;
};
struct MatchingError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

/// Map a frequency onto the unit circle [0, 1).
inline double wrap_unit(double t) {
    double r = t - std::floor(t);
    return (r >= 1.0) ? r - 1.0 : r;
}

/// Wrap-around distance on [0, 1): min(|d|, 1-|d|).
inline double wrap_dist(double a, double b) {
    double d = std::fabs(wrap_unit(a) - wrap_unit(b));
    return std::min(d, 1.0 - d);
}

}  // namespace somp
