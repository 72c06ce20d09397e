#pragma once

#include <stdexcept>
#include <string>

namespace quiltframe {

/// Operand sizes disagree (signal length, coefficient count, lattice L).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid construction parameters: non-divisor steps, unsorted boundaries,
/// coverage gaps, unresolved references in an experiment config.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (zero reference
/// signal, decay exponent too small, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The frame operator is singular, so no dual/tight window or inverse exists.
class NotAFrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the frame structure is not met (e.g. stripe
/// reconstruction with non-Parseval windows, zero diagonal preconditioner).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two independent numerical routes disagree beyond tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateQuiltError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quiltframe
