#pragma once

#include <stdexcept>
#include <string>

namespace simrf {

// Bad input: wrong sizes, out-of-range parameters, malformed files.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// A (scheme, feature map) pairing the estimator theory does not cover.
class UnsupportedCombination : public ArgumentError {
public:
    explicit UnsupportedCombination(const std::string& what) : ArgumentError(what) {}
};

// Numerical failure: series non-convergence, cancellation, quadrature error.
class ComputationError : public std::runtime_error {
public:
    explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

// Inputs whose exponentials would overflow 64-bit floats.
class RangeError : public ComputationError {
public:
    explicit RangeError(const std::string& what) : ComputationError(what) {}
};

}  // namespace simrf
