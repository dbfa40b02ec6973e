#pragma once

#include <stdexcept>
#include <string>

namespace heightinterp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input (formulas, rationals, points). Carries a byte offset.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// A witness is unusable: a variable is unassigned or a builder precondition fails.
class WitnessError : public Error {
public:
  using Error::Error;
};

/// Witness builder asked to certify a pair outside its lemma hypothesis.
class RefusalError : public WitnessError {
public:
  using WitnessError::WitnessError;
};

/// Profile construction failed (D below the slack floor, etc).
class ProfileError : public Error {
public:
  using Error::Error;
};

/// An interval was too wide to decide a comparison at the requested precision.
class PrecisionError : public Error {
public:
  using Error::Error;
};

/// decode: no integer multiple of D lies within the window (the value does
/// not certify as an X_4 member).
class DecodeError : public Error {
public:
  using Error::Error;
};

}  // namespace heightinterp
