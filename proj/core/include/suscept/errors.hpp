#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suscept {

// Base class for everything this library throws on contract violations.
// The CLI maps Error subclasses to exit code 2 (bad input / failed contract)
// and anything else to exit code 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Map construction rejects.
class ExpansionViolated : public Error {
public:
    ExpansionViolated(double x, double slope)
        : Error("expansion violated: |f'(" + std::to_string(x) + ")| = " +
                std::to_string(slope) + " <= 1"),
          x(x), slope(slope) {}
    double x, slope;
};

class EndpointViolated : public Error {
public:
    explicit EndpointViolated(const std::string& what) : Error(what) {}
};

class DiscontinuousAtC : public Error {
public:
    DiscontinuousAtC(double left, double right)
        : Error("branch values disagree at the turning point: " +
                std::to_string(left) + " vs " + std::to_string(right)),
          left(left), right(right) {}
    double left, right;
};

// Backward orbit construction hit a branch with no admissible preimage.
class BranchUnavailable : public Error {
public:
    explicit BranchUnavailable(std::size_t depth)
        : Error("no admissible preimage at backward depth " + std::to_string(depth)),
          depth(depth) {}
    std::size_t depth;
};

// Iterative solver ran out of budget.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::size_t iterations)
        : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
          iterations(iterations) {}
    std::size_t iterations;
};

// Linear solve residual too large, typically z too close to discrete spectrum.
class NearSingular : public Error {
public:
    NearSingular(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"),
          residual(residual) {}
    double residual;
};

// Resolvent data near z = 1 must be mean-zero; surfaces use of a
// non-horizontal perturbation where the theory requires a horizontal one.
class MeanNotZero : public Error {
public:
    explicit MeanNotZero(double mean)
        : Error("resolvent data has nonzero integral " + std::to_string(mean) +
                " near z = 1"),
          mean(mean) {}
    double mean;
};

// A certified truncation needs more orbit terms than are stored.
class OrbitTooShort : public Error {
public:
    OrbitTooShort(std::size_t have, std::size_t need)
        : Error("orbit has " + std::to_string(have) + " points, need " +
                std::to_string(need)),
          have(have), need(need) {}
    std::size_t have, need;
};

// The requested tolerance cannot be certified at any reachable truncation.
class TailUnreachable : public Error {
public:
    explicit TailUnreachable(const std::string& what) : Error(what) {}
};

// Evaluation point outside the series' maximal domain.
class OutsideDomain : public Error {
public:
    explicit OutsideDomain(const std::string& what) : Error(what) {}
};

// rational_sigma on an orbit with no (pre)periodicity record.
class NotPreperiodic : public Error {
public:
    NotPreperiodic() : Error("orbit carries no preperiodicity record") {}
};

// make_horizontal's correction system is numerically singular.
class SingularSystem : public Error {
public:
    explicit SingularSystem(double cond)
        : Error("horizontality correction system is singular (cond ~ " +
                std::to_string(cond) + ")"),
          cond(cond) {}
    double cond;
};

// An operation that requires a horizontal perturbation got a non-horizontal one.
class NotHorizontal : public Error {
public:
    explicit NotHorizontal(double sum)
        : Error("perturbation is not horizontal: order-0 orbit sum = " +
                std::to_string(sum)),
          sum(sum) {}
    double sum;
};

// Preimage-tree growth exceeded its budget before reaching the target density.
class DepthBudgetExceeded : public Error {
public:
    DepthBudgetExceeded(std::size_t depth, std::size_t points)
        : Error("preimage tree exceeded budget at depth " + std::to_string(depth) +
                " with " + std::to_string(points) + " points"),
          depth(depth), points(points) {}
    std::size_t depth, points;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace suscept
