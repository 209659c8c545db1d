#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "cgs/error.hpp"

namespace cgs {

enum class Op : std::uint8_t {
  Const,
  Var,
  // unary
  Neg,
  Sin,
  Cos,
  Tan,
  Atan,
  Exp,
  Log,
  Sqrt,
  // binary
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Atan2,
};

bool is_unary(Op op) noexcept;
bool is_binary(Op op) noexcept;
// Function-call spelling ("sin", "atan2") or operator symbol.
std::string_view op_name(Op op) noexcept;

/// Immutable expression tree over named real variables.
///
/// `Expr` is a cheap value handle to a shared, never-mutated node; copies
/// share structure. The default-constructed expression is the constant 0.
class Expr {
 public:
  Expr();

  static Expr constant(double value);
  static Expr variable(std::string name);
  // Raw constructors: build exactly the requested node, no simplification.
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  Op op() const noexcept;
  double value() const noexcept;            // Const only
  const std::string& name() const noexcept; // Var only
  const Expr& arg(int i) const noexcept;    // 0 for unary, 0/1 for binary

  bool is_constant(double v) const noexcept;
  bool is_zero() const noexcept { return is_constant(0.0); }

  // Identity of the shared node, used for structural sharing in the tape.
  const void* node_id() const noexcept { return node_.get(); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Simplifying constructors used by differentiation and field algebra.
// Rules: 0*e -> 0, 1*e -> e, e+0 -> e, e-0 -> e, 0-e -> -e, e/1 -> e,
// -(c) -> constant, -(-e) -> e. Nothing else.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Op unary_op, const Expr& arg);

/// Parses the expression DSL. Precedence: '^' (right associative) binds
/// tighter than unary minus, which binds tighter than '*' '/', then '+' '-'.
Expr parse_expr(std::string_view text);

/// Prints a fully parenthesized form that `parse_expr` maps back to a
/// structurally equal tree (for trees without negative constants).
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

using Env = std::map<std::string, double, std::less<>>;

/// IEEE double evaluation. Throws UnboundVariable or DomainError.
double eval(const Expr& e, const Env& env);

/// First-order running error bound of `eval(e, env)` in units of machine
/// epsilon: |computed - exact| <= eps * bound, up to O(eps^2). Variables are
/// taken as exact.
double rounding_bound(const Expr& e, const Env& env);

/// Exact structural derivative with respect to variable `v`.
Expr diff(const Expr& e, std::string_view v);

std::set<std::string> variables(const Expr& e);

}  // namespace cgs
