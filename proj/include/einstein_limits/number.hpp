#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

namespace elim {

using Rational = mpq_class;

/// Numeric literal inside an expression: an exact rational, or a double
/// once any decimal has entered the computation. Arithmetic between an exact
/// and an inexact operand yields an inexact result.
class Number {
 public:
  Number() : value_(Rational(0)) {}
  Number(long v) : value_(Rational(v)) {}  // NOLINT(google-explicit-constructor)
  Number(int v) : value_(Rational(v)) {}   // NOLINT(google-explicit-constructor)
  explicit Number(Rational q) : value_(std::move(q)) { std::get<Rational>(value_).canonicalize(); }
  explicit Number(double d) : value_(d) {}

  static Number rational(long num, long den) { return Number(Rational(num, den)); }

  bool is_exact() const { return std::holds_alternative<Rational>(value_); }
  const Rational& exact() const { return std::get<Rational>(value_); }
  double inexact() const { return std::get<double>(value_); }
  double to_double() const;

  bool is_zero() const;
  bool is_one() const;
  bool is_minus_one() const;
  bool is_integer() const;
  bool is_negative() const;
  int sign() const;

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b) { return a + (-b); }
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);

  /// Exact structural identity: 2 (exact) and 2.0 (inexact) differ.
  friend bool operator==(const Number& a, const Number& b);
  /// Total order used for canonical sorting; exact before inexact.
  static int compare(const Number& a, const Number& b);

  std::size_t hash() const;
  std::string to_string() const;

 private:
  std::variant<Rational, double> value_;
};

/// Integer power of an exact rational; nullopt for 0^negative.
std::optional<Rational> rational_ipow(const Rational& base, long exponent);

}  // namespace elim
