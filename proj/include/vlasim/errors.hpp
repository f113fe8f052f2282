#pragma once

#include <stdexcept>
#include <string>

namespace vlasim {

// Hard failures: programming errors, numerical blow-up, bad inputs.
// Feasibility failures of the coefficient solvers are NOT exceptions;
// they are status values on CoefficientSolution so parameter sweeps can
// record the feasibility frontier.

struct SimError : std::runtime_error {
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : SimError {
    explicit DimensionMismatch(const std::string& msg) : SimError("dimension mismatch: " + msg) {}
};

struct NonFiniteState : SimError {
    long particle = -1;
    long step = -1;
    NonFiniteState(long particle_, long step_)
        : SimError("non-finite state at particle " + std::to_string(particle_) +
                   ", step " + std::to_string(step_)),
          particle(particle_), step(step_) {}
};

struct SizeMismatch : SimError {
    explicit SizeMismatch(const std::string& msg) : SimError("size mismatch: " + msg) {}
};

struct CostGuardExceeded : SimError {
    explicit CostGuardExceeded(std::size_t n, std::size_t guard)
        : SimError("exact assignment refused: N = " + std::to_string(n) +
                   " exceeds cost guard " + std::to_string(guard)) {}
};

struct NotPositiveDefinite : SimError {
    explicit NotPositiveDefinite(const std::string& msg) : SimError("not positive definite: " + msg) {}
};

struct NotClosed : SimError {
    explicit NotClosed(const std::string& msg) : SimError("mean ODE not closed: " + msg) {}
};

struct LinearOnlyMode : SimError {
    explicit LinearOnlyMode(const std::string& msg) : SimError("mean-trajectory mode requires linear interaction: " + msg) {}
};

struct SingularLyapunov : SimError {
    explicit SingularLyapunov(const std::string& msg) : SimError("singular Lyapunov system: " + msg) {}
};

struct NonPositiveSeries : SimError {
    explicit NonPositiveSeries(const std::string& msg) : SimError("non-positive series in log fit: " + msg) {}
};

struct InfeasibleForEta : SimError {
    double eta = 0.0;
    double eta0 = 0.0;
    InfeasibleForEta(double eta_, double eta0_)
        : SimError("eta = " + std::to_string(eta_) + " is not below the admissible threshold eta0 = " +
                   std::to_string(eta0_)),
          eta(eta_), eta0(eta0_) {}
};

struct ConfigError : SimError {
    explicit ConfigError(const std::string& msg) : SimError("config error: " + msg) {}
};

}  // namespace vlasim
