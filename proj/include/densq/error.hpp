#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace densq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative radius,
/// zero vector handed to a singular kernel, angle out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A generator would produce more atoms than the configured point budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t requested, std::size_t budget)
        : Error("point budget exceeded: " + std::to_string(requested) + " atoms requested, budget is " +
                std::to_string(budget)),
          requested_(requested), budget_(budget) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t requested_;
    std::size_t budget_;
};

/// A ball that must carry mass is empty.
class DegenerateBall : public Error {
public:
    using Error::Error;
};

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A search over a finite candidate set found nothing admissible.
class NotFound : public Error {
public:
    NotFound(const std::string& what, double best_candidate, double worst_violation)
        : Error(what), best_candidate_(best_candidate), worst_violation_(worst_violation) {}

    double best_candidate() const noexcept { return best_candidate_; }
    /// Largest ratio (observed / allowed) over the constraint family, at the best candidate.
    double worst_violation() const noexcept { return worst_violation_; }

private:
    double best_candidate_;
    double worst_violation_;
};

} // namespace densq
