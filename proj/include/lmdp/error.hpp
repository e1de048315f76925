#pragma once

#include <stdexcept>
#include <string>

namespace lmdp {

/// Error categories double as CLI exit codes.
enum class ErrorKind { usage = 2, schema = 3, budget = 4, numerical = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Violated precondition on arguments (bad shapes, out-of-range parameters).
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error(ErrorKind::usage, w) {}
};

/// Malformed model or configuration document.
struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::schema, w) {}
};

/// Exact enumeration would exceed the configured leaf budget.
struct BudgetExceeded : Error {
    explicit BudgetExceeded(const std::string& w) : Error(ErrorKind::budget, w) {}
};

/// Singular systems, failed certificates, infeasible optimisation.
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

} // namespace lmdp
