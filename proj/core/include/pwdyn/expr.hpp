#pragma once

// Expression language for map branches: parsing, printing, exact symbolic
// derivatives and evaluation.
//
//   expr    := term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := unary ('^' literal)?          right-associative, literal exponent
//   unary   := '-' unary | primary            binds tighter than '^'
//   primary := number | 'x' | '(' expr ')'
//            | fn '(' expr ')'                fn in sin cos exp log sqrt abs
//            | 'spow' '(' expr ',' literal ')'
//
// `spow(u, a)` is sign(u) * |u|^a with a >= 1; it is the building block for
// non-flat critical points and one-sided power laws.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace pwdyn {

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Spow,
};

bool is_unary(Op op) noexcept;
bool is_binary(Op op) noexcept;

class Expr;

namespace detail {
struct Node;
}

// Immutable expression tree. Copies share structure, so passing by value is
// cheap and safe across threads.
class Expr {
public:
  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr var();
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr pow(Expr base, double exponent);
  static Expr spow(Expr base, double exponent);

  Op op() const noexcept;
  // Constant value for Const, exponent for Pow/Spow, 0 otherwise.
  double value() const noexcept;
  const Expr& arg() const;  // unary operand, base of Pow/Spow, lhs of binary
  const Expr& rhs() const;  // binary only

  bool is_constant(double v) const noexcept { return op() == Op::Const && value() == v; }
  std::size_t size() const noexcept;   // node count
  std::size_t depth() const noexcept;  // leaves have depth 1

  friend bool operator==(const Expr& a, const Expr& b) noexcept;
  friend bool operator!=(const Expr& a, const Expr& b) noexcept { return !(a == b); }

private:
  friend struct detail::Node;
  struct NullTag {};
  explicit Expr(NullTag) noexcept {}
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

Expr parse(std::string_view source);

// Fully parenthesised rendering; parse(to_string(e)) == e.
std::string to_string(const Expr& e);

// d/dx by structural rules, with the light simplifications 0*e, e*1, e+0,
// e-0, e^1 and e^0 applied while building.
Expr differentiate(const Expr& e);

// Checked evaluation; throws EvalError naming the offending node.
double eval(const Expr& e, double x);

// Flattened stack program for hot loops. Returns NaN instead of throwing when
// a domain error occurs; callers that need a diagnostic re-run eval().
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double operator()(double x) const noexcept;
  bool empty() const noexcept { return code_.empty(); }

private:
  struct Instr {
    Op op;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_stack_ = 0;
};

}  // namespace pwdyn
