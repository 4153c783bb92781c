#pragma once

#include <stdexcept>
#include <string>

namespace ctp {

/// Base class for all library errors so callers can catch everything at once.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A requested moment of a volume law does not exist (the defining integral
/// diverges for the given kind/parameters).
class DivergentMoment : public Error {
public:
    explicit DivergentMoment(const std::string& what) : Error(what) {}
};

/// An obstacle id was consumed twice by the same trajectory.
class DoubleConsume : public Error {
public:
    explicit DoubleConsume(const std::string& what) : Error(what) {}
};

/// A coalescence cascade exceeded the configured step bound.
class CascadeOverflow : public Error {
public:
    explicit CascadeOverflow(const std::string& what) : Error(what) {}
};

/// The tagged volume exceeded the configured ceiling.
class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& what) : Error(what) {}
};

/// A jump-process path exceeded the configured jump cap.
class JumpBudgetExceeded : public Error {
public:
    explicit JumpBudgetExceeded(const std::string& what) : Error(what) {}
};

/// Total mass on the volume grid drifted beyond tolerance during a solve.
class MassDrift : public Error {
public:
    explicit MassDrift(const std::string& what) : Error(what) {}
};

/// Probability mass escaped past the top node of the volume grid.
class GridOverflow : public Error {
public:
    explicit GridOverflow(const std::string& what) : Error(what) {}
};

/// Monte Carlo error bars are too wide to order the reported quantities.
class InconclusiveNoise : public Error {
public:
    explicit InconclusiveNoise(const std::string& what) : Error(what) {}
};

/// The scripted blow-up configuration did not reproduce its predicted
/// collision schedule.
class ConstructionMismatch : public Error {
public:
    explicit ConstructionMismatch(const std::string& what) : Error(what) {}
};

/// A configuration key failed validation.  `key` names the offending entry.
class ValidationError : public Error {
public:
    ValidationError(std::string key_, const std::string& what)
        : Error("config key '" + key_ + "': " + what), key(std::move(key_)) {}
    std::string key;
};

/// A configuration file line could not be parsed at all.
class ParseError : public Error {
public:
    ParseError(int line_, const std::string& what)
        : Error("config line " + std::to_string(line_) + ": " + what), line(line_) {}
    int line;
};

}  // namespace ctp
