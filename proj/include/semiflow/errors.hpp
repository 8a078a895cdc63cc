#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semiflow {

// Raised when a supremum/infimum search lands on the edge of its search
// window, i.e. the window was too small to bracket the extremizer.
struct window_error : std::runtime_error {
    explicit window_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a trajectory component exceeds the blow-up threshold.
struct blowup_error : std::runtime_error {
    blowup_error(const std::string& msg, std::size_t at_step)
        : std::runtime_error(msg), step(at_step) {}
    std::size_t step;
};

// Raised when an iterative constant search (bridge slopes, etc.) cannot
// produce a valid construction within its retry budget.
struct construction_error : std::runtime_error {
    explicit construction_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace semiflow
