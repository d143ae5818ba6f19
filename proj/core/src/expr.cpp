#include "pwdyn/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "pwdyn/error.hpp"

namespace pwdyn {

namespace detail {
struct Node {
  Op op = Op::Const;
  double value = 0.0;
  Expr a{Expr::NullTag{}};
  Expr b{Expr::NullTag{}};
};
}  // namespace detail

namespace {

const Expr& empty_expr() {
  static const Expr e;
  return e;
}

const char* fn_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    default: return "";
  }
}

const char* infix(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    default: return "";
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string format_literal(double v) {
  auto s = format_number(v);
  return std::signbit(v) ? "(" + s + ")" : s;
}

}  // namespace

bool is_unary(Op op) noexcept {
  switch (op) {
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Abs:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op op) noexcept {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div;
}

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() {
  static const auto zero = std::make_shared<const detail::Node>();
  node_ = zero;
}

Expr Expr::constant(double v) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::Const;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::var() {
  static const Expr x = [] {
    auto n = std::make_shared<detail::Node>();
    n->op = Op::Var;
    return Expr(std::move(n));
  }();
  return x;
}

Expr Expr::unary(Op op, Expr arg) {
  if (!is_unary(op)) throw PreconditionError("Expr::unary: not a unary op");
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->a = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (!is_binary(op)) throw PreconditionError("Expr::binary: not a binary op");
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, double exponent) {
  if (!std::isfinite(exponent)) throw PreconditionError("Expr::pow: exponent must be finite");
  auto n = std::make_shared<detail::Node>();
  n->op = Op::Pow;
  n->value = exponent;
  n->a = std::move(base);
  return Expr(std::move(n));
}

Expr Expr::spow(Expr base, double exponent) {
  if (!(exponent >= 1.0) || !std::isfinite(exponent))
    throw PreconditionError("Expr::spow: exponent must be a finite literal >= 1");
  auto n = std::make_shared<detail::Node>();
  n->op = Op::Spow;
  n->value = exponent;
  n->a = std::move(base);
  return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }

const Expr& Expr::arg() const {
  if (op() == Op::Const || op() == Op::Var) return empty_expr();
  return node_->a;
}

const Expr& Expr::rhs() const {
  if (!is_binary(op())) return empty_expr();
  return node_->b;
}

std::size_t Expr::size() const noexcept {
  const Op o = op();
  if (o == Op::Const || o == Op::Var) return 1;
  if (is_binary(o)) return 1 + node_->a.size() + node_->b.size();
  return 1 + node_->a.size();
}

std::size_t Expr::depth() const noexcept {
  const Op o = op();
  if (o == Op::Const || o == Op::Var) return 1;
  if (is_binary(o)) return 1 + std::max(node_->a.depth(), node_->b.depth());
  return 1 + node_->a.depth();
}

bool operator==(const Expr& a, const Expr& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  const Op o = a.op();
  if (o == Op::Var) return true;
  if (o == Op::Const || o == Op::Pow || o == Op::Spow) {
    // Bitwise-equal literals; distinguishes 0 from -0 as printing does.
    if (a.value() != b.value() || std::signbit(a.value()) != std::signbit(b.value())) return false;
    if (o == Op::Const) return true;
  }
  if (!(a.node_->a == b.node_->a)) return false;
  if (is_binary(o)) return a.node_->b == b.node_->b;
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"+", "-", "*", "/", "^", "end of input"}, "unexpected trailing input");
    return e;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
    throw ParseError(pos_, std::move(expected), detail);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail({std::string(1, c)}, std::string("expected '") + c + "'");
  }

  bool at_number() {
    skip_ws();
    if (pos_ >= src_.size()) return false;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    return c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]));
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail({"number"}, "expected a numeric literal");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is "2" followed by garbage
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail({"number"}, "malformed numeric literal");
    }
    return v;
  }

  // literal := number | '-' number | '(' ['-'] number ')'
  double literal(const char* context) {
    skip_ws();
    const std::size_t start = pos_;
    bool paren = accept('(');
    bool neg = accept('-');
    if (!at_number()) {
      pos_ = start;
      throw ExponentNotLiteral(pos_, {"number"}, std::string(context) + " exponent must be a numeric literal");
    }
    double v = number();
    if (paren && !accept(')')) {
      throw ExponentNotLiteral(pos_, {")"}, std::string(context) + " exponent must be a numeric literal");
    }
    return neg ? -v : v;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  Expr expr() {
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
    Expr lhs = power();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::Mul, lhs, power());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::Div, lhs, power());
      } else {
        return lhs;
      }
    }
  }

  // Right-associative: a^b^c == a^(b^c); with literal exponents b^c folds.
  double exponent_chain() {
    double e = literal("'^'");
    if (accept('^')) e = std::pow(e, exponent_chain());
    return e;
  }

  Expr power() {
    Expr base = unary();
    if (accept('^')) {
      double e = exponent_chain();
      if (!std::isfinite(e)) throw ExponentNotLiteral(pos_, {"number"}, "exponent is not finite");
      return Expr::pow(base, e);
    }
    return base;
  }

  Expr unary() {
    if (accept('-')) {
      if (at_number()) return Expr::constant(-number());
      return Expr::unary(Op::Neg, unary());
    }
    return primary();
  }

  Expr primary() {
    static const std::vector<std::string> kPrimary{"number", "x", "(", "-", "sin", "cos", "exp",
                                                   "log", "sqrt", "abs", "spow"};
    skip_ws();
    if (pos_ >= src_.size()) fail(kPrimary, "unexpected end of input");
    if (at_number()) return Expr::constant(number());
    if (accept('(')) {
      Expr e = expr();
      expect(')');
      return e;
    }
    const std::size_t start = pos_;
    const std::string id = identifier();
    if (id.empty()) fail(kPrimary, "unexpected character");
    if (id == "x") return Expr::var();
    static const std::array<std::pair<const char*, Op>, 6> kFns{{{"sin", Op::Sin},
                                                                  {"cos", Op::Cos},
                                                                  {"exp", Op::Exp},
                                                                  {"log", Op::Log},
                                                                  {"sqrt", Op::Sqrt},
                                                                  {"abs", Op::Abs}}};
    for (const auto& [name, op] : kFns) {
      if (id == name) {
        expect('(');
        Expr e = expr();
        expect(')');
        return Expr::unary(op, e);
      }
    }
    if (id == "spow") {
      expect('(');
      Expr e = expr();
      expect(',');
      const std::size_t lit_pos = pos_;
      double a = literal("spow");
      if (!(a >= 1.0) || !std::isfinite(a))
        throw ExponentNotLiteral(lit_pos, {"number >= 1"}, "spow exponent must be >= 1");
      expect(')');
      return Expr::spow(e, a);
    }
    pos_ = start;
    fail(kPrimary, "unknown identifier '" + id + "'");
  }
};

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
    : Error([&] {
        std::string msg = "parse error at byte " + std::to_string(offset) + ": " + detail;
        if (!expected.empty()) {
          msg += " (expected one of:";
          for (const auto& e : expected) msg += " " + e;
          msg += ")";
        }
        return msg;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return format_literal(e.value());
    case Op::Var: return "x";
    case Op::Neg: return "(-(" + to_string(e.arg()) + "))";
    case Op::Pow: return "(" + to_string(e.arg()) + ")^" + format_literal(e.value());
    case Op::Spow: return "spow(" + to_string(e.arg()) + ", " + format_number(e.value()) + ")";
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return "(" + to_string(e.arg()) + infix(e.op()) + to_string(e.rhs()) + ")";
    default:
      return std::string(fn_name(e.op())) + "(" + to_string(e.arg()) + ")";
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr c(double v) { return Expr::constant(v); }

Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::Add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return b.op() == Op::Const ? c(-b.value()) : Expr::unary(Op::Neg, b);
  return Expr::binary(Op::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return c(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.op() == Op::Const && b.op() == Op::Const) return c(a.value() * b.value());
  return Expr::binary(Op::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return c(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr neg(const Expr& a) {
  if (a.op() == Op::Const) return c(-a.value());
  return Expr::unary(Op::Neg, a);
}

Expr powr(const Expr& a, double p) {
  if (p == 1.0) return a;
  if (p == 0.0) return c(1.0);
  return Expr::pow(a, p);
}

}  // namespace

Expr differentiate(const Expr& e) {
  const Expr& u = e.arg();
  switch (e.op()) {
    case Op::Const: return c(0.0);
    case Op::Var: return c(1.0);
    case Op::Neg: return neg(differentiate(u));
    case Op::Sin: return mul(Expr::unary(Op::Cos, u), differentiate(u));
    case Op::Cos: return mul(neg(Expr::unary(Op::Sin, u)), differentiate(u));
    case Op::Exp: return mul(e, differentiate(u));
    case Op::Log: return div(differentiate(u), u);
    case Op::Sqrt: return div(differentiate(u), mul(c(2.0), e));
    case Op::Abs: return mul(div(u, e), differentiate(u));
    case Op::Add: return add(differentiate(u), differentiate(e.rhs()));
    case Op::Sub: return sub(differentiate(u), differentiate(e.rhs()));
    case Op::Mul:
      return add(mul(differentiate(u), e.rhs()), mul(u, differentiate(e.rhs())));
    case Op::Div: {
      const Expr& v = e.rhs();
      return div(sub(mul(differentiate(u), v), mul(u, differentiate(v))), powr(v, 2.0));
    }
    case Op::Pow: {
      const double p = e.value();
      if (p == 0.0) return c(0.0);
      return mul(mul(c(p), powr(u, p - 1.0)), differentiate(u));
    }
    case Op::Spow: {
      // d/dx sign(u)|u|^a = a |u|^(a-1) u'
      const double a = e.value();
      return mul(mul(c(a), powr(Expr::unary(Op::Abs, u), a - 1.0)), differentiate(u));
    }
  }
  return c(0.0);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

inline double spow_value(double u, double a) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::fabs(u), a), u);
}

inline double apply_unary(Op op, double u) {
  switch (op) {
    case Op::Neg: return -u;
    case Op::Sin: return std::sin(u);
    case Op::Cos: return std::cos(u);
    case Op::Exp: return std::exp(u);
    case Op::Log: return u > 0.0 ? std::log(u) : std::nan("");
    case Op::Sqrt: return u >= 0.0 ? std::sqrt(u) : std::nan("");
    case Op::Abs: return std::fabs(u);
    default: return std::nan("");
  }
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return b != 0.0 ? a / b : std::nan("");
    default: return std::nan("");
  }
}

}  // namespace

double eval(const Expr& e, double x) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var: return x;
    case Op::Pow: {
      const double u = eval(e.arg(), x);
      if (u == 0.0 && e.value() < 0.0) throw EvalError(to_string(e), "division by zero");
      const double r = std::pow(u, e.value());
      if (std::isnan(r)) throw EvalError(to_string(e), "negative base with non-integer exponent");
      return r;
    }
    case Op::Spow: return spow_value(eval(e.arg(), x), e.value());
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const double a = eval(e.arg(), x);
      const double b = eval(e.rhs(), x);
      if (e.op() == Op::Div && b == 0.0) throw EvalError(to_string(e), "division by zero");
      return apply_binary(e.op(), a, b);
    }
    default: {
      const double u = eval(e.arg(), x);
      if (e.op() == Op::Log && !(u > 0.0)) throw EvalError(to_string(e), "log of non-positive argument");
      if (e.op() == Op::Sqrt && !(u >= 0.0)) throw EvalError(to_string(e), "sqrt of negative argument");
      return apply_unary(e.op(), u);
    }
  }
}

CompiledExpr::CompiledExpr(const Expr& e) {
  std::size_t depth = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& n) {
    const Op o = n.op();
    if (o == Op::Const || o == Op::Var) {
      code_.push_back({o, n.value()});
      max_stack_ = std::max(max_stack_, ++depth);
      return;
    }
    emit(n.arg());
    if (is_binary(o)) {
      emit(n.rhs());
      --depth;
    }
    code_.push_back({o, n.value()});
  };
  emit(e);
}

double CompiledExpr::operator()(double x) const noexcept {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> inline_stack;
  std::vector<double> heap;
  double* st = inline_stack.data();
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    st = heap.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: st[sp++] = in.value; break;
      case Op::Var: st[sp++] = x; break;
      case Op::Pow: {
        double& u = st[sp - 1];
        u = (u == 0.0 && in.value < 0.0) ? std::nan("") : std::pow(u, in.value);
        break;
      }
      case Op::Spow: st[sp - 1] = spow_value(st[sp - 1], in.value); break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
        st[sp - 2] = apply_binary(in.op, st[sp - 2], st[sp - 1]);
        --sp;
        break;
      default: st[sp - 1] = apply_unary(in.op, st[sp - 1]); break;
    }
  }
  return sp == 1 ? st[0] : std::nan("");
}

}  // namespace pwdyn
