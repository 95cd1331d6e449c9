#pragma once

#include <stdexcept>
#include <string>

namespace neklab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Grid or quadrature too coarse for the requested quantity.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Combinatorial or compute budget exhausted.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, long long attempted)
      : Error(what + " (attempted " + std::to_string(attempted) + ")"), attempted_(attempted) {}
  long long attempted() const noexcept { return attempted_; }

 private:
  long long attempted_;
};

/// A divisor k·ω(I) fell below the admissible bound.
class SmallDivisorError : public Error {
 public:
  using Error::Error;
};

/// Time stepping failed (fixed point did not converge).
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant that must hold by construction was violated.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Iterative scheme stopped reducing its target quantity.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace neklab
