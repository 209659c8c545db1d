#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgs {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Evaluation left the domain of an operation (division by zero, log of a
// non-positive value, non-finite result, ...). The message names the node.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numerical procedure failed: rank deficiency, Newton non-convergence,
// divergence of a trajectory.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A precondition of a construction does not hold (non-holomorphic field,
// non-abelian system, non-transverse data).
class RefusalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgs
