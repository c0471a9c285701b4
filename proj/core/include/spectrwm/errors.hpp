#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spectrwm {

/// A jump-rate exponent left the representable range. Carries the offending
/// mode and the exponent that tripped the cap.
class StiffnessError : public std::runtime_error {
public:
    StiffnessError(std::size_t mode, double exponent, double cap);

    std::size_t mode() const noexcept { return mode_; }
    double exponent() const noexcept { return exponent_; }

private:
    std::size_t mode_;
    double exponent_;
};

/// The event loop hit its step cap before reaching the requested horizon.
class BudgetError : public std::runtime_error {
public:
    BudgetError(std::uint64_t steps, double time_reached, double horizon);

    std::uint64_t steps() const noexcept { return steps_; }
    double time_reached() const noexcept { return time_reached_; }
    double horizon() const noexcept { return horizon_; }

private:
    std::uint64_t steps_;
    double time_reached_;
    double horizon_;
};

/// An operation was asked to handle a model it has no formula for.
class UnsupportedModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Too many replicas failed, or an experiment could not produce a verdict.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spectrwm
