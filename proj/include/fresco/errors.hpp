#pragma once

#include <stdexcept>
#include <string>

namespace fresco {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A coefficient beyond the reliable truncation order was requested.
struct InsufficientPrecision : Error {
    int needed;
    int have;
    InsufficientPrecision(int needed_, int have_)
        : Error("coefficient of b^" + std::to_string(needed_) +
                " requested, but the series is reliable only below b^" + std::to_string(have_)),
          needed(needed_), have(have_) {}
};

struct NotAUnit : Error {
    NotAUnit() : Error("series has zero constant term and cannot be inverted") {}
};

struct NotAGenerator : Error {
    NotAGenerator() : Error("element does not generate the module (top coordinate has zero constant term)") {}
};

struct NoUnitSolution : Error {
    using Error::Error;
    NoUnitSolution() : Error("no unit right-factor solution: the constant-term obstruction forces S(0) = 0") {}
};

struct NotGeometric : Error {
    using Error::Error;
    NotGeometric() : Error("invariants violate the geometric condition lambda_j + j > k") {}
};

struct NotMonogenic : Error {
    using Error::Error;
    NotMonogenic() : Error("matrix module is not monogenic (constant part is not a principal nilpotent)") {}
};

struct NonConvergent : Error {
    using Error::Error;
    NonConvergent() : Error("operator power series did not fall below the working order within the iteration cap") {}
};

struct PreconditionFailed : Error {
    using Error::Error;
};

struct BetaVanishes : Error {
    BetaVanishes() : Error("beta vanishes: no rank-2 sub-theme with nonzero parameter to classify") {}
};

/// Structured parse/validation failure; `field` points at the offending input field.
struct ValidationError : Error {
    std::string field;
    ValidationError(std::string field_, const std::string& what_)
        : Error(what_), field(std::move(field_)) {}
};

} // namespace fresco
