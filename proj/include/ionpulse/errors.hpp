// Exception types shared across the library. The CLI maps these onto
// process exit codes (config -> 2, fit -> 3, I/O -> 4).
#pragma once

#include <stdexcept>
#include <string>

namespace ionpulse {

// Precondition violation on a numeric argument (non-finite, out of range, ...).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad or inconsistent run configuration; message carries the offending
// section.key path where one exists.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An estimator failed to produce a usable result (non-convergence,
// non-identifiable data). Message carries the diagnostics.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File read/write/parse failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative numerical routine hit its refinement limit before meeting
// the requested tolerance.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ionpulse
