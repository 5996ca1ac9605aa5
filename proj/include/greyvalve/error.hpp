#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace greyvalve {

// Root of every error the library throws. Callers that only care about
// "bad input vs. broken environment" can catch Error and IoError.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of a formula
// (non-positive temperature, p1 < pvc, pv > pCrit, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input: dimension mismatch, missing field,
// invalid configuration value.
class InputError : public Error {
public:
    using Error::Error;
};

// A formula was asked to evaluate outside its applicability range,
// e.g. a flow coefficient for a choked regime.
class NotApplicableError : public Error {
public:
    using Error::Error;
};

// A factorization or solve failed numerically.
class ConditioningError : public Error {
public:
    using Error::Error;
};

// A percentage metric was requested on a zero target.
class ZeroTargetError : public Error {
public:
    ZeroTargetError(std::size_t index)
        : Error("zero target at index " + std::to_string(index) +
                ": percentage error is undefined (filter zero targets first)"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// One or more training samples violate the hybrid-model preconditions.
class InconsistentSampleError : public Error {
public:
    InconsistentSampleError(std::vector<std::size_t> indices, const std::string& what)
        : Error(what), indices_(std::move(indices)) {}
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    std::vector<std::size_t> indices_;
};

// The simulator produced a non-finite state.
class SimulationError : public Error {
public:
    SimulationError(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Failure to read or write a file.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace greyvalve
