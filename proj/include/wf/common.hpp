#pragma once

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace wf {

using cnum = std::complex<double>;

// Numerical tolerances used throughout the library.
inline constexpr double kTol = 1e-12;          // isometry / projector / golden-value checks
inline constexpr double kDistTol = 1e-10;      // probability distributions summing to 1
inline constexpr double kPruneTol = 1e-12;     // branch display cutoff (|amp|^2)
inline constexpr double kInputNormTol = 1e-6;  // superpose() treats larger norm deviation as user error

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Register/dimension bookkeeping problems.
struct LayoutError : Error {
    explicit LayoutError(const std::string& msg) : Error(msg) {}
};

// Conditioning on an event of probability <= kTol. Never silently 0/0 = 0.
struct ZeroProbabilityError : Error {
    explicit ZeroProbabilityError(const std::string& msg) : Error(msg) {}
};

// Invalid user-supplied numerical data (non-orthonormal basis, bad norm, ...).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    int line;
    int column;
    ParseError(const std::string& msg, int line_, int column_)
        : Error("line " + std::to_string(line_) + ", col " + std::to_string(column_) + ": " + msg),
          line(line_),
          column(column_) {}
};

// Fixed-width numeric formatting for machine-readable output (17 significant digits).
inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace wf
