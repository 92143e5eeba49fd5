#pragma once

#include <stdexcept>
#include <string>

namespace etdrd {

// Bad user input / malformed configuration. CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure inside a solver (singular pivot, nonconvergent root
// polish, residual check failure). CLI maps this to exit code 1.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time integration aborted: non-finite value or domain violation detected.
struct StepperAbort : std::runtime_error {
    StepperAbort(const std::string& what, double t_abort, long step_abort)
        : std::runtime_error(what), t(t_abort), step(step_abort) {}
    double t = 0.0;
    long step = 0;
};

// A requested configuration would exceed the resident-memory budget.
struct MemoryGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace etdrd
