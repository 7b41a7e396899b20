#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mfdetau {

enum class ExprKind {
  number,
  variable,  // the independent variable t
  negate,
  add,
  subtract,
  multiply,
  divide,
  power,
  call,
};

enum class ExprFunc { sin, cos, exp, ln, sqrt };

inline const char* func_name(ExprFunc f) {
  switch (f) {
    case ExprFunc::sin: return "sin";
    case ExprFunc::cos: return "cos";
    case ExprFunc::exp: return "exp";
    case ExprFunc::ln: return "ln";
    case ExprFunc::sqrt: return "sqrt";
  }
  return "?";
}

/// Reported when evaluation leaves the real domain (ln of a non-positive
/// value, sqrt of a negative value, division by zero, fractional power of a
/// negative base). Carries the offending value of t.
class EvalDomainError : public std::runtime_error {
 public:
  EvalDomainError(const std::string& what, double t)
      : std::runtime_error(what + " (at t = " + std::to_string(t) + ")"),
        at_t_(t) {}
  double at_t() const { return at_t_; }

 private:
  double at_t_;
};

class DifferentiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable expression tree over the variable t. Subtrees are shared, so
/// copies are cheap and all operations are reentrant.
class Expr {
 public:
  Expr() : Expr(number(0.0)) {}

  static Expr number(double v) {
    return Expr(std::make_shared<const Node>(Node{ExprKind::number, v, ExprFunc::sin, nullptr, nullptr}));
  }

  static Expr variable() {
    return Expr(std::make_shared<const Node>(Node{ExprKind::variable, 0.0, ExprFunc::sin, nullptr, nullptr}));
  }

  static Expr negate(const Expr& e) {
    if (e.is_number()) return number(-e.number_value());
    if (e.kind() == ExprKind::negate) return e.operand(0);
    return make(ExprKind::negate, e, Expr());
  }

  static Expr add(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return number(a.number_value() + b.number_value());
    if (a.is_number(0.0)) return b;
    if (b.is_number(0.0)) return a;
    return make(ExprKind::add, a, b);
  }

  static Expr subtract(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return number(a.number_value() - b.number_value());
    if (b.is_number(0.0)) return a;
    if (a.is_number(0.0)) return negate(b);
    return make(ExprKind::subtract, a, b);
  }

  static Expr multiply(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return number(a.number_value() * b.number_value());
    if (a.is_number(0.0) || b.is_number(0.0)) return number(0.0);
    if (a.is_number(1.0)) return b;
    if (b.is_number(1.0)) return a;
    if (a.is_number(-1.0)) return negate(b);
    if (b.is_number(-1.0)) return negate(a);
    return make(ExprKind::multiply, a, b);
  }

  static Expr divide(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number() && b.number_value() != 0.0) {
      return number(a.number_value() / b.number_value());
    }
    if (b.is_number(1.0)) return a;
    return make(ExprKind::divide, a, b);
  }

  static Expr power(const Expr& base, const Expr& exponent) {
    if (exponent.is_number(1.0)) return base;
    if (exponent.is_number(0.0)) return number(1.0);
    if (base.is_number() && exponent.is_number()) {
      const double v = std::pow(base.number_value(), exponent.number_value());
      if (std::isfinite(v)) return number(v);
    }
    return make(ExprKind::power, base, exponent);
  }

  static Expr apply(ExprFunc f, const Expr& arg) {
    if (arg.is_number()) {
      const double v = apply_numeric(f, arg.number_value());
      if (std::isfinite(v)) return number(v);
    }
    auto n = std::make_shared<const Node>(Node{ExprKind::call, 0.0, f, arg.root_, nullptr});
    return Expr(std::move(n));
  }

  ExprKind kind() const { return root_->kind; }
  bool is_number() const { return root_->kind == ExprKind::number; }
  bool is_number(double v) const { return is_number() && root_->value == v; }
  double number_value() const { return root_->value; }
  ExprFunc func() const { return root_->func; }

  /// Child access: operand(0) is the only child of unary nodes and the left
  /// child of binary nodes.
  Expr operand(int i) const {
    return Expr(i == 0 ? root_->lhs : root_->rhs);
  }

 private:
  struct Node {
    ExprKind kind;
    double value;
    ExprFunc func;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  static double apply_numeric(ExprFunc f, double x) {
    switch (f) {
      case ExprFunc::sin: return std::sin(x);
      case ExprFunc::cos: return std::cos(x);
      case ExprFunc::exp: return std::exp(x);
      case ExprFunc::ln: return x > 0.0 ? std::log(x) : std::nan("");
      case ExprFunc::sqrt: return x >= 0.0 ? std::sqrt(x) : std::nan("");
    }
    return std::nan("");
  }

  static Expr make(ExprKind kind, const Expr& a, const Expr& b) {
    return Expr(std::make_shared<const Node>(Node{kind, 0.0, ExprFunc::sin, a.root_, b.root_}));
  }

  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;

  friend double eval(const Expr&, double);
  friend Expr differentiate(const Expr&);
  friend Expr shift_argument(const Expr&, double);
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::subtract(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::multiply(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::divide(a, b); }
inline Expr operator-(const Expr& a) { return Expr::negate(a); }

inline double eval(const Expr& e, double t) {
  switch (e.kind()) {
    case ExprKind::number: return e.number_value();
    case ExprKind::variable: return t;
    case ExprKind::negate: return -eval(e.operand(0), t);
    case ExprKind::add: return eval(e.operand(0), t) + eval(e.operand(1), t);
    case ExprKind::subtract: return eval(e.operand(0), t) - eval(e.operand(1), t);
    case ExprKind::multiply: return eval(e.operand(0), t) * eval(e.operand(1), t);
    case ExprKind::divide: {
      const double num = eval(e.operand(0), t);
      const double den = eval(e.operand(1), t);
      if (den == 0.0) throw EvalDomainError("division by zero", t);
      return num / den;
    }
    case ExprKind::power: {
      const double base = eval(e.operand(0), t);
      const double exponent = eval(e.operand(1), t);
      if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        if (exponent == 0.0) return 1.0;
        throw EvalDomainError("zero raised to a negative power", t);
      }
      if (base < 0.0 && std::rint(exponent) != exponent) {
        throw EvalDomainError("fractional power of a negative base", t);
      }
      return std::pow(base, exponent);
    }
    case ExprKind::call: {
      const double x = eval(e.operand(0), t);
      switch (e.func()) {
        case ExprFunc::sin: return std::sin(x);
        case ExprFunc::cos: return std::cos(x);
        case ExprFunc::exp: return std::exp(x);
        case ExprFunc::ln:
          if (x <= 0.0) throw EvalDomainError("ln of a non-positive value", t);
          return std::log(x);
        case ExprFunc::sqrt:
          if (x < 0.0) throw EvalDomainError("sqrt of a negative value", t);
          return std::sqrt(x);
      }
      throw EvalDomainError("unknown function", t);
    }
  }
  throw EvalDomainError("malformed expression node", t);
}

/// Exact symbolic derivative with constant folding. Powers f^g are supported
/// for constant g only; other exponents raise DifferentiationError.
inline Expr differentiate(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::number: return Expr::number(0.0);
    case ExprKind::variable: return Expr::number(1.0);
    case ExprKind::negate: return Expr::negate(differentiate(e.operand(0)));
    case ExprKind::add:
      return Expr::add(differentiate(e.operand(0)), differentiate(e.operand(1)));
    case ExprKind::subtract:
      return Expr::subtract(differentiate(e.operand(0)), differentiate(e.operand(1)));
    case ExprKind::multiply: {
      const Expr f = e.operand(0), g = e.operand(1);
      return Expr::add(Expr::multiply(differentiate(f), g),
                       Expr::multiply(f, differentiate(g)));
    }
    case ExprKind::divide: {
      const Expr f = e.operand(0), g = e.operand(1);
      return Expr::divide(
          Expr::subtract(Expr::multiply(differentiate(f), g),
                         Expr::multiply(f, differentiate(g))),
          Expr::multiply(g, g));
    }
    case ExprKind::power: {
      const Expr base = e.operand(0), exponent = e.operand(1);
      if (!exponent.is_number()) {
        throw DifferentiationError(
            "differentiate: powers are supported for constant exponents only");
      }
      const double c = exponent.number_value();
      return Expr::multiply(
          Expr::multiply(Expr::number(c), Expr::power(base, Expr::number(c - 1.0))),
          differentiate(base));
    }
    case ExprKind::call: {
      const Expr u = e.operand(0);
      const Expr du = differentiate(u);
      switch (e.func()) {
        case ExprFunc::sin:
          return Expr::multiply(Expr::apply(ExprFunc::cos, u), du);
        case ExprFunc::cos:
          return Expr::negate(Expr::multiply(Expr::apply(ExprFunc::sin, u), du));
        case ExprFunc::exp:
          return Expr::multiply(Expr::apply(ExprFunc::exp, u), du);
        case ExprFunc::ln:
          return Expr::divide(du, u);
        case ExprFunc::sqrt:
          return Expr::divide(du, Expr::multiply(Expr::number(2.0),
                                                 Expr::apply(ExprFunc::sqrt, u)));
      }
      throw DifferentiationError("differentiate: unknown function");
    }
  }
  throw DifferentiationError("differentiate: malformed expression node");
}

/// e(t + delta): substitutes the shifted argument for the variable.
inline Expr shift_argument(const Expr& e, double delta) {
  if (delta == 0.0) return e;
  switch (e.kind()) {
    case ExprKind::number: return e;
    case ExprKind::variable:
      return Expr::add(Expr::variable(), Expr::number(delta));
    case ExprKind::negate:
      return Expr::negate(shift_argument(e.operand(0), delta));
    case ExprKind::add:
      return Expr::add(shift_argument(e.operand(0), delta), shift_argument(e.operand(1), delta));
    case ExprKind::subtract:
      return Expr::subtract(shift_argument(e.operand(0), delta), shift_argument(e.operand(1), delta));
    case ExprKind::multiply:
      return Expr::multiply(shift_argument(e.operand(0), delta), shift_argument(e.operand(1), delta));
    case ExprKind::divide:
      return Expr::divide(shift_argument(e.operand(0), delta), shift_argument(e.operand(1), delta));
    case ExprKind::power:
      return Expr::power(shift_argument(e.operand(0), delta), shift_argument(e.operand(1), delta));
    case ExprKind::call:
      return Expr::apply(e.func(), shift_argument(e.operand(0), delta));
  }
  return e;
}

struct ParseDiagnostic {
  std::size_t offset = 0;   // byte offset into the input, <= input length
  std::string message;
  std::string expected;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(ParseDiagnostic d)
      : std::runtime_error(d.message + " at offset " + std::to_string(d.offset) +
                           (d.expected.empty() ? "" : "; expected " + d.expected)),
        diagnostic_(std::move(d)) {}
  const ParseDiagnostic& diagnostic() const { return diagnostic_; }

 private:
  ParseDiagnostic diagnostic_;
};

namespace detail {

// Recursive-descent parser. Grammar, loosest to tightest binding:
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          (right-associative)
//   atom  := number | 't' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) {
      fail("unexpected trailing input", "end of input or an operator");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message, const std::string& expected) {
    throw ParseError(ParseDiagnostic{std::min(pos_, text_.size()), message, expected});
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      if (consume('+')) {
        e = Expr::add(e, parse_term());
      } else if (consume('-')) {
        e = Expr::subtract(e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (consume('*')) {
        e = Expr::multiply(e, parse_unary());
      } else if (consume('/')) {
        e = Expr::divide(e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (consume('-')) return Expr::negate(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (consume('^')) return Expr::power(base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) {
      fail("unexpected end of input", "a number, 't', 'pi', 'e', a function call, or '('");
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!consume(')')) fail("unbalanced parenthesis", "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail("unexpected character", "a number, 't', 'pi', 'e', a function call, or '('");
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }

  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
      } else {
        pos_ = mark;  // the 'e' belongs to the following token (Euler constant)
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token == "." || token.empty()) {
      pos_ = start;
      fail("malformed number", "digits");
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
      return Expr::number(v);
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number", "a finite numeric literal");
    }
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return Expr::variable();
    if (name == "pi") return Expr::number(std::acos(-1.0));
    if (name == "e") return Expr::number(std::exp(1.0));
    ExprFunc f;
    if (name == "sin") f = ExprFunc::sin;
    else if (name == "cos") f = ExprFunc::cos;
    else if (name == "exp") f = ExprFunc::exp;
    else if (name == "ln") f = ExprFunc::ln;
    else if (name == "sqrt") f = ExprFunc::sqrt;
    else {
      pos_ = start;
      fail("unknown identifier '" + name + "'", "'t', 'pi', 'e', or one of sin/cos/exp/ln/sqrt");
    }
    if (!consume('(')) fail("function name must be followed by '('", "'('");
    Expr arg = parse_sum();
    if (!consume(')')) fail("unbalanced parenthesis in function call", "')'");
    return Expr::apply(f, arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void format_number(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

inline void print_expr(std::ostream& os, const Expr& e, int parent_precedence);

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::add:
    case ExprKind::subtract: return 1;
    case ExprKind::multiply:
    case ExprKind::divide: return 2;
    case ExprKind::negate: return 3;
    case ExprKind::power: return 4;
    case ExprKind::number: return e.number_value() < 0.0 ? 3 : 5;
    default: return 5;
  }
}

inline void print_expr(std::ostream& os, const Expr& e, int parent_precedence) {
  const int prec = precedence(e);
  const bool parens = prec < parent_precedence;
  if (parens) os << '(';
  switch (e.kind()) {
    case ExprKind::number: format_number(os, e.number_value()); break;
    case ExprKind::variable: os << 't'; break;
    case ExprKind::negate:
      os << '-';
      print_expr(os, e.operand(0), 4);
      break;
    case ExprKind::add:
      print_expr(os, e.operand(0), 1);
      os << " + ";
      print_expr(os, e.operand(1), 2);
      break;
    case ExprKind::subtract:
      print_expr(os, e.operand(0), 1);
      os << " - ";
      print_expr(os, e.operand(1), 2);
      break;
    case ExprKind::multiply:
      print_expr(os, e.operand(0), 2);
      os << "*";
      print_expr(os, e.operand(1), 3);
      break;
    case ExprKind::divide:
      print_expr(os, e.operand(0), 2);
      os << "/";
      print_expr(os, e.operand(1), 3);
      break;
    case ExprKind::power:
      print_expr(os, e.operand(0), 5);
      os << "^";
      print_expr(os, e.operand(1), 4);
      break;
    case ExprKind::call:
      os << func_name(e.func()) << '(';
      print_expr(os, e.operand(0), 0);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

}  // namespace detail

inline Expr parse_expression(std::string_view text) {
  return detail::ExprParser(text).parse();
}

inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, 0);
  return os.str();
}

}  // namespace mfdetau
