#pragma once

#include <stdexcept>
#include <string>

namespace sgkron {

/// Raised when a caller supplies parameters outside a routine's domain.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Cholesky pivot was not positive.
class NotPositiveDefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// PCG encountered a nonpositive curvature or preconditioned residual product.
class Breakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dense fallback was requested above its size guard.
class SizeGuardExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A diagnostic could not be produced from the data at hand.
class Unavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Overflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InvalidArgument(message);
}

} // namespace detail
} // namespace sgkron
