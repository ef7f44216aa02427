#pragma once

#include <stdexcept>
#include <string>

namespace demest {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched sizes: wrong detector counts, non-power-of-two vector lengths,
/// dense representations past the n <= 24 cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the mathematical domain of an operation (rates >= 1/2,
/// missing coordinates, non-integer round labels, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A logarithm hit a non-positive polarization. Carries the subset integer
/// (or -1 when the offending subset has no small integer view).
class PoleError : public Error {
 public:
  PoleError(const std::string& what, long long subset_index)
      : Error(what), subset_index_(subset_index) {}
  long long subset_index() const { return subset_index_; }

 private:
  long long subset_index_;
};

/// Malformed text input. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

/// Malformed binary input (bad stride, bad characters, truncated files).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A least-squares design that cannot resolve every edge direction.
class RankError : public Error {
 public:
  using Error::Error;
};

}  // namespace demest
