#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symclust {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `position` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at byte " + std::to_string(position) + ")"), position_(position) {}
  explicit ParseError(const std::string& what) : Error(what), position_(0) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Well-formed input that violates a model contract: duplicate or unknown
/// ids, out-of-range probabilities, overlapping findings, invalid
/// clusterings, uncoverable symptoms, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The observed findings have (numerically) zero probability.
class ImpossibleEvidence : public Error {
 public:
  using Error::Error;
};

/// A size cap (positive findings, partition size, enumeration size) was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Inclusion-exclusion cancellation pushed a result outside its clamp window.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace symclust
