#pragma once

#include <stdexcept>
#include <string>

namespace frogsim {

/// Input outside the declared range of an operation.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configured vertex or particle budget was exceeded.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An exact series could not reach its tolerance, or boundary leakage
/// exceeded the allowed budget.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A malformed weighted-network file.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A parameter scan found no threshold crossing inside its interval.
class NoCrossingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace frogsim
