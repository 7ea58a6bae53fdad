#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace lockdown {

/// Input rejected before any numerical work (maps to CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy answer (exit code 3).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what,
                         std::optional<std::pair<double, double>> bracket = std::nullopt)
        : std::runtime_error(what), bracket_(bracket) {}

    /// Last bracket held by an iterative solver when it gave up, if any.
    const std::optional<std::pair<double, double>>& bracket() const noexcept { return bracket_; }

private:
    std::optional<std::pair<double, double>> bracket_;
};

} // namespace lockdown
