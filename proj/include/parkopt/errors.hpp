#pragma once

#include <stdexcept>
#include <string>

namespace parkopt {

// Base class for all library errors. Contract violations throw subclasses so
// callers (and tests) can distinguish bad input from broken invariants.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Device or storage operation would leave its feasible box.
struct CapacityViolation : Error { using Error::Error; };
// An input argument is outside its declared range.
struct BoundViolation : Error { using Error::Error; };
// Static configuration is inconsistent (rejected at load).
struct InvalidConfig : Error { using Error::Error; };
// Aggregation weights do not sum to one.
struct ShareMismatch : Error { using Error::Error; };
// Least-squares system has no unique solution; widen the data horizon.
struct RankDeficient : Error { using Error::Error; };
// Too few distinct observations to identify the model.
struct InsufficientData : Error { using Error::Error; };
// Closed-form price denominator vanished; no interior optimum exists.
struct DegenerateDenominator : Error { using Error::Error; };
// A quantity provably bounded by the theory left its interval.
struct InvariantBroken : Error { using Error::Error; };
// Input file violates the schema contract.
struct SchemaError : Error { using Error::Error; };
// Unknown or inconsistent unit declaration.
struct UnitError : Error { using Error::Error; };
// A series value that must be nonnegative is negative.
struct NegativeValue : Error { using Error::Error; };
// Brute-force grid would exceed the point budget.
struct GridTooLarge : Error { using Error::Error; };
// Iterative solver stalled above its tolerance.
struct NotConverged : Error { using Error::Error; };
// Linear subproblem has no finite optimum (configuration error).
struct UnboundedProblem : Error { using Error::Error; };
// Linear subproblem has an empty feasible set.
struct InfeasibleProblem : Error { using Error::Error; };
// Filesystem failure while emitting reports.
struct IoError : Error { using Error::Error; };

} // namespace parkopt
