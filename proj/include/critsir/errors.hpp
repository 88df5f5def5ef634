#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace critsir {

// Error taxonomy shared across the library. Each condition gets its own type
// so callers and tests can assert on the precise failure mode.

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tail coefficient too large for the solved point masses to stay nonnegative.
struct InfeasibleTail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degree sum is odd, no pairing of half-edges exists.
struct ParityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A multigraph's degree sequence disagrees with the one supplied.
struct DegreeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The walk-rebuild state machine was fed an inconsistent input path.
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A cumulative index ran past the supplied walk's domain.
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The identically-zero function has no Lamperti time change.
struct ZeroFunction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection sampler exhausted its attempt budget; carries diagnostics.
struct RejectionBudgetExceeded : std::runtime_error {
    std::uint64_t attempts = 0;
    std::uint64_t longest_run = 0;
    RejectionBudgetExceeded(const std::string& what, std::uint64_t attempts_,
                            std::uint64_t longest_run_)
        : std::runtime_error(what), attempts(attempts_), longest_run(longest_run_) {}
};

struct EmptySample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace critsir
