#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarmhist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or configuration value. `field()` names the offending input
// when one can be identified.
class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A detector was asked about a window longer than the history it holds.
class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

// Exhaustive computation requested on an instance that is too large.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Caller broke a protocol rule (e.g. a second exchange for the same pair).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data; `position()` is a byte offset or record index.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace swarmhist
