#pragma once

#include <stdexcept>
#include <string>

namespace unfold {

// Caller broke a documented precondition (shape mismatch, bad argument).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Pivot fell below the singularity tolerance during a direct solve.
struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request exceeds a hard capacity guard, e.g. exhaustive search width.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss (CLI exit code 3).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace unfold
