#pragma once

#include <stdexcept>
#include <string>

namespace supconv {

/// Adaptive quadrature ran out of subdivision budget before reaching the
/// requested absolute tolerance, or met a non-finite integrand value.
struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

/// The tail behaviour of an improper integral could not be certified as
/// convergent or divergent (tabulated nonlinearities with decreasing tails).
struct IndeterminateTail : std::runtime_error {
    explicit IndeterminateTail(const std::string& what) : std::runtime_error(what) {}
};

/// Monotone bisection could not bracket a root below the overflow cap.
struct RootBracketFailure : std::runtime_error {
    explicit RootBracketFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A diagonal entry of an assembled operator underflowed (degenerate
/// coefficient matrix).
struct SingularOperator : std::runtime_error {
    explicit SingularOperator(const std::string& what) : std::runtime_error(what) {}
};

/// The sparse linear kernel failed to factorize or solve.
struct LinearSolveFailure : std::runtime_error {
    explicit LinearSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace supconv
