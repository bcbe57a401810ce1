#include "einstein_limits/number.hpp"

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <functional>

namespace elim {

double Number::to_double() const {
  if (is_exact()) return exact().get_d();
  return inexact();
}

bool Number::is_zero() const { return is_exact() ? sgn(exact()) == 0 : inexact() == 0.0; }
bool Number::is_one() const { return is_exact() && exact() == 1; }
bool Number::is_minus_one() const { return is_exact() && exact() == -1; }
bool Number::is_integer() const { return is_exact() && exact().get_den() == 1; }
bool Number::is_negative() const { return sign() < 0; }

int Number::sign() const {
  if (is_exact()) return sgn(exact());
  const double d = inexact();
  return (d > 0) - (d < 0);
}

Number Number::operator-() const {
  if (is_exact()) return Number(Rational(-exact()));
  return Number(-inexact());
}

Number operator+(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact() + b.exact()));
  return Number(a.to_double() + b.to_double());
}

Number operator*(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact() * b.exact()));
  return Number(a.to_double() * b.to_double());
}

Number operator/(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact() / b.exact()));
  return Number(a.to_double() / b.to_double());
}

bool operator==(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return false;
  if (a.is_exact()) return a.exact() == b.exact();
  return std::memcmp(&std::get<double>(a.value_), &std::get<double>(b.value_), sizeof(double)) == 0;
}

int Number::compare(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return a.is_exact() ? -1 : 1;
  if (a.is_exact()) return cmp(a.exact(), b.exact());
  const double x = a.inexact();
  const double y = b.inexact();
  if (x < y) return -1;
  if (y < x) return 1;
  return 0;
}

std::size_t Number::hash() const {
  if (is_exact()) {
    const auto& q = exact();
    std::size_t h = std::hash<std::string>{}(q.get_num().get_str(16));
    h ^= std::hash<std::string>{}(q.get_den().get_str(16)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
  double d = inexact();
  if (d == 0.0) d = 0.0;
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  return std::hash<std::uint64_t>{}(bits) ^ 0x51ed27e5ULL;
}

std::string Number::to_string() const {
  if (is_exact()) {
    const auto& q = exact();
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", inexact());
  std::string s(buf);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::optional<Rational> rational_ipow(const Rational& base, long exponent) {
  if (exponent < 0 && sgn(base) == 0) return std::nullopt;
  mpz_class num;
  mpz_class den;
  const unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational r = exponent < 0 ? Rational(den, num) : Rational(num, den);
  r.canonicalize();
  return r;
}

}  // namespace elim
