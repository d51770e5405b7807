#pragma once

#include <stdexcept>
#include <string>

namespace enslab {

// Raised when a density or wavefunction comes too close to a zero for the
// (log p, S) representation to be meaningful.
struct NodeDetected : std::runtime_error {
    double t;
    explicit NodeDetected(const std::string& what, double time = 0.0)
        : std::runtime_error(what), t(time) {}
};

struct StateBlowup : std::runtime_error {
    double t;
    StateBlowup(const std::string& what, double time)
        : std::runtime_error(what), t(time) {}
};

struct IncommensurateBoost : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace enslab
