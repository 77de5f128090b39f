#pragma once

#include <stdexcept>
#include <string>

namespace vef {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-positive Jacobian, degenerate face or tangled element.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& msg, long row = -1) : Error(msg), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Nonpositive angular-flux denominator while forming VEF data.
class ClosureError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace vef
