#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "einstein_limits/number.hpp"

namespace elim {

enum class Op : std::uint8_t { Number, Symbol, Neg, Add, Mul, Pow, Exp, Log, Sqrt, Sin, Cos };

class Expr;

struct Node {
  Op op;
  Number number;
  std::string name;
  std::vector<Expr> args;
  std::size_t hash = 0;
  std::size_t size = 1;
};

/// Immutable symbolic scalar expression. Copies share the underlying tree.
///
/// Arithmetic operators build raw (unsimplified) trees; call simplify() to
/// obtain the canonical form used for syntactic equality tests.
class Expr {
 public:
  Expr();  // exact zero
  Expr(int v);                  // NOLINT(google-explicit-constructor)
  Expr(long v);                 // NOLINT(google-explicit-constructor)
  Expr(const Number& n);        // NOLINT(google-explicit-constructor)
  explicit Expr(double v);

  static Expr symbol(std::string name);
  static Expr rational(long num, long den) { return Expr(Number::rational(num, den)); }
  static Expr make(Op op, std::vector<Expr> args);

  Op op() const { return node_->op; }
  const Number& number() const { return node_->number; }
  const std::string& name() const { return node_->name; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args[i]; }
  std::size_t hash() const { return node_->hash; }
  /// Node count of the tree (shared subtrees counted once per occurrence).
  std::size_t size() const { return node_->size; }
  const Node* id() const { return node_.get(); }

  bool is(Op op) const { return node_->op == op; }
  bool is_number() const { return is(Op::Number); }
  bool is_symbol() const { return is(Op::Symbol); }
  bool is_zero() const { return is_number() && number().is_zero(); }
  bool is_one() const { return is_number() && number().is_one(); }

  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Total structural order: numbers, then symbols by name, then composites by
/// structural hash with a deep comparison as tie-break.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);

Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sum(const std::vector<Expr>& terms);
Expr product(const std::vector<Expr>& factors);

std::ostream& operator<<(std::ostream& os, const Expr& e);

// ---------------------------------------------------------------------------
// Errors

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Operations

using Bindings = std::map<std::string, double, std::less<>>;
using Replacements = std::map<std::string, Expr, std::less<>>;

/// Parses the infix grammar: `+ - * / ^`, unary minus, parentheses,
/// exp/log/sqrt/sin/cos calls, identifiers, integer, rational and decimal
/// literals. `^` is right-associative and binds tighter than unary minus.
Expr parse(std::string_view text);

/// Canonical form: constants folded, sums and products flattened and sorted,
/// like powers and like terms collected, exp/log cancelled, products of sums
/// expanded. Runs the pipeline to a fixpoint (at most 32 passes).
Expr simplify(const Expr& e);

/// Exact derivative with respect to the symbol `var`, simplified.
Expr differentiate(const Expr& e, std::string_view var);

/// Simultaneous replacement of symbols; the result is not simplified.
Expr substitute(const Expr& e, const Replacements& replacements);

double eval(const Expr& e, const Bindings& bindings);

std::set<std::string> free_symbols(const Expr& e);
bool depends_on(const Expr& e, std::string_view name);

/// Stack-machine form of an expression over a fixed slot layout, for
/// evaluating the same expression at many points.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Every free symbol of `e` must appear in `slots`.
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots);

  double operator()(std::span<const double> values) const;
  bool is_constant() const { return program_.size() == 1 && program_[0].code == Code::Const; }

 private:
  enum class Code : std::uint8_t { Const, Slot, Neg, Add, Mul, Pow, Exp, Log, Sqrt, Sin, Cos };
  struct Instr {
    Code code;
    std::uint32_t count;  // operand count for Add/Mul, slot index for Slot
    double value;
    std::uint32_t source;  // index into sources_ for error messages
  };
  std::vector<Instr> program_;
  std::vector<Expr> sources_;
  std::size_t max_depth_ = 0;
};

}  // namespace elim
