// Error types shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace ehsc {

/// An argument lies outside the domain on which a model is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The source encoder was given zero energy, so the rate diverges.
class RateInfinite : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A policy parameter map does not cover the current (q, h) state.
class MissingState : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// An action asked for more energy than the buffer holds.
class EnergyViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class TooShort : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ehsc
