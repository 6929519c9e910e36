#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdsurr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point lies outside the domain a basis or surrogate was built for.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid argument combination (bad sizes, counts, flags).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// maxvol could not find a nonsingular pivot block.
class PivotError : public Error {
public:
    PivotError(const std::string& what, int mode) : Error(what), mode_(mode) {}
    int mode() const noexcept { return mode_; }

private:
    int mode_;
};

/// A closed-loop state left the box a surrogate was trained on.
class OutOfBoxError : public DomainError {
public:
    OutOfBoxError(const std::string& what, std::vector<double> state)
        : DomainError(what), state_(std::move(state)) {}
    const std::vector<double>& state() const noexcept { return state_; }

private:
    std::vector<double> state_;
};

/// Hamiltonian has no d-dimensional stable invariant subspace.
class StabilizabilityError : public Error {
public:
    using Error::Error;
};

/// Ill-conditioned factorisation (singular U₁ block, failed Cholesky, ...).
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Closed loop left the blow-up guard.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// A gradient was requested at a non-differentiable point.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Fit could not be completed (diverged, empty data, ...).
class FitError : public Error {
public:
    using Error::Error;
};

/// Metric is undefined for the given input (e.g. zero reference norm).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Tensor too large for a dense oracle conversion.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hdsurr
