#pragma once

#include <stdexcept>
#include <string>

namespace fsheat {

// Bad user input: malformed configuration, out-of-range parameters, or a
// call that violates an operation's stated domain (e.g. kernel evaluation
// below the resolvable time). The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that started from valid input but failed numerically:
// overflow, non-convergence, a time grid too coarse for the implicit
// Volterra step, or a trajectory leaving the representable range.
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A mathematical invariant that the code promises to uphold was found
// violated at run time (nonpositive ground state, broken symmetry, ...).
// The CLI maps this to exit code 4.
class PropertyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

} // namespace fsheat
