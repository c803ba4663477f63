#pragma once

#include "sgcal/models.hpp"

#include <cstddef>
#include <memory>
#include <string>

namespace sgcal {

/// Computer model run as a child process. On start the child receives the
/// line "p q"; each evaluation then sends "x1 ... xp theta1 ... thetaq" and
/// reads one number back per line. Calls are serialized with a mutex.
class ExternalSimulator {
public:
    /// Runs `command` through /bin/sh. Throws DomainError if it cannot start.
    ExternalSimulator(const std::string& command, std::size_t p, std::size_t q);
    ~ExternalSimulator();
    ExternalSimulator(const ExternalSimulator&) = delete;
    ExternalSimulator& operator=(const ExternalSimulator&) = delete;

    /// Throws DomainError on a dimension mismatch and ParseError when the child
    /// exits or answers with something other than a number.
    double operator()(std::span<const double> x, std::span<const double> theta);

private:
    struct State;
    std::unique_ptr<State> state_;
};

/// Simulator callback sharing one child process.
[[nodiscard]] Simulator make_external_simulator(const std::string& command, std::size_t p, std::size_t q);

}  // namespace sgcal
