#pragma once

#include <cmath>

#include "cgs/expr.hpp"

// Scalar semantics of every node kind, shared by the tree evaluator and the
// tape kernels so that all evaluation paths agree bit for bit.
namespace cgs::detail {

inline bool domain_ok(Op op, double a, double b) noexcept {
  switch (op) {
    case Op::Div:
      return b != 0.0;
    case Op::Log:
      return a > 0.0;
    case Op::Sqrt:
      return a >= 0.0;
    case Op::Pow:
      if (a < 0.0 && std::trunc(b) != b) return false;
      if (a == 0.0 && b < 0.0) return false;
      return true;
    default:
      return true;
  }
}

inline double apply_unary(Op op, double a) noexcept {
  switch (op) {
    case Op::Neg:
      return -a;
    case Op::Sin:
      return std::sin(a);
    case Op::Cos:
      return std::cos(a);
    case Op::Tan:
      return std::tan(a);
    case Op::Atan:
      return std::atan(a);
    case Op::Exp:
      return std::exp(a);
    case Op::Log:
      return std::log(a);
    case Op::Sqrt:
      return std::sqrt(a);
    default:
      return a;
  }
}

inline double apply_binary(Op op, double a, double b) noexcept {
  switch (op) {
    case Op::Add:
      return a + b;
    case Op::Sub:
      return a - b;
    case Op::Mul:
      return a * b;
    case Op::Div:
      return a / b;
    case Op::Pow:
      return std::pow(a, b);
    case Op::Atan2:
      return std::atan2(a, b);
    default:
      return a;
  }
}

}  // namespace cgs::detail
