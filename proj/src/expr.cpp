#include "cgs/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "cgs/detail/ops.hpp"

namespace cgs {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::string name;
  std::array<Expr, 2> args;
};

namespace {

// A null node stands for the constant 0.
const Expr& empty_expr() {
  static const Expr zero;
  return zero;
}

const std::string& empty_name() {
  static const std::string name;
  return name;
}

}  // namespace

bool is_unary(Op op) noexcept {
  return op >= Op::Neg && op <= Op::Sqrt;
}

bool is_binary(Op op) noexcept {
  return op >= Op::Add;
}

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::Const:
      return "const";
    case Op::Var:
      return "var";
    case Op::Neg:
      return "-";
    case Op::Sin:
      return "sin";
    case Op::Cos:
      return "cos";
    case Op::Tan:
      return "tan";
    case Op::Atan:
      return "atan";
    case Op::Exp:
      return "exp";
    case Op::Log:
      return "log";
    case Op::Sqrt:
      return "sqrt";
    case Op::Add:
      return "+";
    case Op::Sub:
      return "-";
    case Op::Mul:
      return "*";
    case Op::Div:
      return "/";
    case Op::Pow:
      return "^";
    case Op::Atan2:
      return "atan2";
  }
  return "?";
}

Expr::Expr() = default;

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args[0] = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args[0] = std::move(lhs);
  n->args[1] = std::move(rhs);
  return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_ ? node_->op : Op::Const; }
double Expr::value() const noexcept { return node_ ? node_->value : 0.0; }
const std::string& Expr::name() const noexcept { return node_ ? node_->name : empty_name(); }

const Expr& Expr::arg(int i) const noexcept {
  if (!node_ || i < 0 || i > 1) return empty_expr();
  return node_->args[static_cast<std::size_t>(i)];
}

bool Expr::is_constant(double v) const noexcept { return op() == Op::Const && value() == v; }

// ---------------------------------------------------------------------------
// Simplifying constructors

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expr::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.op() == Op::Const) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.arg(0);
  return Expr::unary(Op::Neg, a);
}

Expr pow(const Expr& base, const Expr& exponent) {
  return Expr::binary(Op::Pow, base, exponent);
}

Expr apply(Op unary_op, const Expr& arg) {
  if (unary_op == Op::Neg) return -arg;
  return Expr::unary(unary_op, arg);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(Op::Neg, unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected operand");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail("expected operand");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '(') return Expr::variable(std::move(name));

    static const std::pair<std::string_view, Op> functions[] = {
        {"sin", Op::Sin},   {"cos", Op::Cos}, {"tan", Op::Tan},   {"atan", Op::Atan},
        {"exp", Op::Exp},   {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"atan2", Op::Atan2},
    };
    Op op = Op::Const;
    for (const auto& [fname, fop] : functions) {
      if (fname == name) op = fop;
    }
    if (op == Op::Const) {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    ++pos_;  // '('
    Expr first = expression();
    Expr result;
    if (op == Op::Atan2) {
      if (!accept(',')) fail("expected ',' in atan2");
      Expr second = expression();
      result = Expr::binary(Op::Atan2, first, second);
    } else {
      result = Expr::unary(op, first);
    }
    if (!accept(')')) fail("expected ')'");
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Const:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

void format_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void print(std::string& out, const Expr& e, int min_prec) {
  const int prec = precedence(e);
  const bool wrap = prec < min_prec;
  if (wrap) out += '(';
  switch (e.op()) {
    case Op::Const:
      format_number(out, e.value());
      break;
    case Op::Var:
      out += e.name();
      break;
    case Op::Neg:
      out += '-';
      print(out, e.arg(0), 3);
      break;
    case Op::Add:
    case Op::Sub:
      print(out, e.arg(0), 1);
      out += e.op() == Op::Add ? " + " : " - ";
      print(out, e.arg(1), 2);
      break;
    case Op::Mul:
    case Op::Div:
      print(out, e.arg(0), 2);
      out += e.op() == Op::Mul ? "*" : "/";
      print(out, e.arg(1), 3);
      break;
    case Op::Pow:
      print(out, e.arg(0), 5);
      out += '^';
      print(out, e.arg(1), 3);
      break;
    case Op::Atan2:
      out += "atan2(";
      print(out, e.arg(0), 0);
      out += ", ";
      print(out, e.arg(1), 0);
      out += ')';
      break;
    default:
      out += op_name(e.op());
      out += '(';
      print(out, e.arg(0), 0);
      out += ')';
      break;
  }
  if (wrap) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(out, e, 0);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node_id() == b.node_id()) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const:
      return a.value() == b.value() && std::signbit(a.value()) == std::signbit(b.value());
    case Op::Var:
      return a.name() == b.name();
    default:
      if (!structurally_equal(a.arg(0), b.arg(0))) return false;
      return !is_binary(a.op()) || structurally_equal(a.arg(1), b.arg(1));
  }
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, const Env& env) {
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      auto it = env.find(e.name());
      if (it == env.end()) throw UnboundVariable(e.name());
      return it->second;
    }
    default:
      break;
  }
  const double a = eval(e.arg(0), env);
  const double b = is_binary(e.op()) ? eval(e.arg(1), env) : 0.0;
  if (!detail::domain_ok(e.op(), a, b)) {
    throw DomainError("domain error in '" + std::string(op_name(e.op())) + "' node: " + to_string(e));
  }
  const double r =
      is_binary(e.op()) ? detail::apply_binary(e.op(), a, b) : detail::apply_unary(e.op(), a);
  if (!std::isfinite(r)) {
    throw DomainError("non-finite result in '" + std::string(op_name(e.op())) + "' node: " + to_string(e));
  }
  return r;
}

namespace {

struct Bounded {
  double value;
  double bound;
};

Bounded bounded_eval(const Expr& e, const Env& env, std::unordered_map<const void*, Bounded>& seen) {
  if (auto it = seen.find(e.node_id()); it != seen.end()) return it->second;
  Bounded out{};
  const Op op = e.op();
  if (op == Op::Const) {
    out = {e.value(), std::abs(e.value())};
  } else if (op == Op::Var) {
    out = {eval(e, env), 0.0};
  } else {
    const Bounded a = bounded_eval(e.arg(0), env, seen);
    const Bounded b = is_binary(op) ? bounded_eval(e.arg(1), env, seen) : Bounded{0.0, 0.0};
    if (!detail::domain_ok(op, a.value, b.value)) {
      throw DomainError("domain error in '" + std::string(op_name(op)) + "' node: " + to_string(e));
    }
    const double r = is_binary(op) ? detail::apply_binary(op, a.value, b.value) : detail::apply_unary(op, a.value);
    if (!std::isfinite(r)) {
      throw DomainError("non-finite result in '" + std::string(op_name(op)) + "' node: " + to_string(e));
    }
    const double x = a.value;
    double prop = 0.0;  // propagated error of the arguments
    switch (op) {
      case Op::Neg: prop = a.bound; break;
      case Op::Sin: prop = std::abs(std::cos(x)) * a.bound; break;
      case Op::Cos: prop = std::abs(std::sin(x)) * a.bound; break;
      case Op::Tan: prop = (1.0 + r * r) * a.bound; break;
      case Op::Atan: prop = a.bound / (1.0 + x * x); break;
      case Op::Exp: prop = std::abs(r) * a.bound; break;
      case Op::Log: prop = a.bound / std::abs(x); break;
      case Op::Sqrt: prop = r > 0.0 ? a.bound / (2.0 * r) : a.bound; break;
      case Op::Add:
      case Op::Sub: prop = a.bound + b.bound; break;
      case Op::Mul: prop = std::abs(b.value) * a.bound + std::abs(x) * b.bound; break;
      case Op::Div: prop = (a.bound + std::abs(r) * b.bound) / std::abs(b.value); break;
      case Op::Pow: {
        const double dbase = x != 0.0 ? std::abs(b.value * r / x) : (b.value == 1.0 ? 1.0 : 0.0);
        const double dexp = x > 0.0 ? std::abs(r * std::log(x)) : 0.0;
        prop = dbase * a.bound + dexp * b.bound;
        break;
      }
      case Op::Atan2: {
        const double rr = x * x + b.value * b.value;
        prop = rr > 0.0 ? (std::abs(b.value) * a.bound + std::abs(x) * b.bound) / rr : 0.0;
        break;
      }
      default: break;
    }
    out = {r, prop + std::abs(r)};
  }
  seen.emplace(e.node_id(), out);
  return out;
}

}  // namespace

double rounding_bound(const Expr& e, const Env& env) {
  std::unordered_map<const void*, Bounded> seen;
  return bounded_eval(e, env, seen).bound;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, std::string_view v) {
  const Op op = e.op();
  if (op == Op::Const) return Expr::constant(0.0);
  if (op == Op::Var) return Expr::constant(e.name() == v ? 1.0 : 0.0);

  const Expr& a = e.arg(0);
  const Expr da = diff(a, v);
  if (is_unary(op)) {
    if (da.is_zero()) return Expr::constant(0.0);
    switch (op) {
      case Op::Neg:
        return -da;
      case Op::Sin:
        return apply(Op::Cos, a) * da;
      case Op::Cos:
        return -(apply(Op::Sin, a) * da);
      case Op::Tan: {
        Expr c = apply(Op::Cos, a);
        return da / (c * c);
      }
      case Op::Atan:
        return da / (Expr::constant(1.0) + a * a);
      case Op::Exp:
        return e * da;
      case Op::Log:
        return da / a;
      case Op::Sqrt:
        return da / (Expr::constant(2.0) * e);
      default:
        break;
    }
  }

  const Expr& b = e.arg(1);
  const Expr db = diff(b, v);
  switch (op) {
    case Op::Add:
      return da + db;
    case Op::Sub:
      return da - db;
    case Op::Mul:
      return da * b + a * db;
    case Op::Div:
      if (db.is_zero()) return da / b;
      return (da * b - a * db) / (b * b);
    case Op::Pow:
      if (db.is_zero()) {
        if (da.is_zero()) return Expr::constant(0.0);
        if (b.op() == Op::Const) {
          return Expr::constant(b.value()) * pow(a, Expr::constant(b.value() - 1.0)) * da;
        }
        return b * pow(a, b - Expr::constant(1.0)) * da;
      }
      if (da.is_zero()) return e * apply(Op::Log, a) * db;
      return e * (db * apply(Op::Log, a) + b * da / a);
    case Op::Atan2:
      // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
      return (b * da - a * db) / (a * a + b * b);
    default:
      break;
  }
  return Expr::constant(0.0);
}

namespace {

void collect(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) {
    out.insert(e.name());
    return;
  }
  if (e.op() == Op::Const) return;
  collect(e.arg(0), out);
  if (is_binary(e.op())) collect(e.arg(1), out);
}

}  // namespace

std::set<std::string> variables(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

}  // namespace cgs
