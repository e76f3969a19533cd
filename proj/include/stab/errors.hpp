#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace stab {

// Base for every error raised by the library.
class StabError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user configuration (CLI exit code 2).
class ConfigError : public StabError {
public:
    using StabError::StabError;
};

// Numeric failures (CLI exit code 3).
class NumericError : public StabError {
public:
    using StabError::StabError;
};

class NumericDomainError : public NumericError {
public:
    using NumericError::NumericError;
};

class SamplingError : public NumericError {
public:
    using NumericError::NumericError;
};

class BoundInfeasibleError : public NumericError {
public:
    using NumericError::NumericError;
};

// Raised when the sampled decay rate is not positive; carries the offending state.
class DecayConditionError : public NumericError {
public:
    DecayConditionError(const std::string& what, Eigen::VectorXd witness)
        : NumericError(what), witness_(std::move(witness)) {}
    const Eigen::VectorXd& witness() const noexcept { return witness_; }

private:
    Eigen::VectorXd witness_;
};

class IntegrationError : public NumericError {
public:
    IntegrationError(const std::string& what, long step) : NumericError(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace stab
