#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace instrbo {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad dimensions, counts, missing endpoints).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid argument to an operation (dimension mismatch, k out of range).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Matrix factorization failed even after the full jitter ladder.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, std::vector<double> attempted_jitters)
        : Error(what), jitters_(std::move(attempted_jitters)) {}

    const std::vector<double>& attempted_jitters() const { return jitters_; }

private:
    std::vector<double> jitters_;
};

/// Oracle evaluation failed on every item or probe.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// HTTP request failed after exhausting all retry attempts.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts) : Error(what), attempts_(attempts) {}

    int attempts() const { return attempts_; }

private:
    int attempts_ = 0;
};

/// Per-campaign oracle call budget spent; campaign state is persisted before halting.
class BudgetExhaustedError : public Error {
public:
    using Error::Error;
};

/// Acquisition search could not proceed (e.g. a whole generation evaluated to NaN).
class SearchError : public Error {
public:
    using Error::Error;
};

}  // namespace instrbo
