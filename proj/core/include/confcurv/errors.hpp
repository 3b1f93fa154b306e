#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace confcurv {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is a byte offset into the input
/// (may equal the input length when the text ended too early).
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Function evaluated outside its real domain (log/sqrt of a negative
/// number, division by zero, non-integer power of a negative base).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The conformal factor vanishes at the query point.
class SingularMetric : public Error {
 public:
  using Error::Error;
};

/// Some 3 f_i + f_j vanishes where the ratio it divides is needed.
class Degenerate : public Error {
 public:
  Degenerate(std::string what, std::vector<double> point)
      : Error(std::move(what)), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// The multiplicative constant differs depending on which diagonal
/// equation is used to fix it.
class ScaleInconsistent : public Error {
 public:
  using Error::Error;
};

/// The quadratic family (a, b, c) produces a conformal factor that is
/// identically zero.
class DegenerateFamily : public Error {
 public:
  using Error::Error;
};

/// A generator h that is identically zero gives T = 0.
class DegenerateTensor : public Error {
 public:
  using Error::Error;
};

/// f(x0)/f(x) < 0 somewhere: the isotropic density changes sign.
class NegativeRadicand : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario document. `key_path` is a JSON-pointer-like path.
class SchemaError : public Error {
 public:
  SchemaError(std::string key_path, const std::string& what)
      : Error("schema error at '" + key_path + "': " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace confcurv
