#pragma once

#include <stdexcept>
#include <string>

namespace irt {

// Bad inputs: malformed files, inconsistent ids, out-of-range parameters.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-convergence beyond configured limits, integrator breakdown.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace irt
