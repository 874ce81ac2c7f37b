#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace projem {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FellerViolation : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class RateUnavailable : public Error {
public:
    using Error::Error;
};

class PlanInfeasible : public Error {
public:
    using Error::Error;
};

class MissingThreshold : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when a scheme iterate leaves the finite reals.
class NonFinite : public Error {
public:
    NonFinite(std::size_t index, double value)
        : Error("non-finite iterate at step " + std::to_string(index) + " (value " +
                std::to_string(value) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace projem
