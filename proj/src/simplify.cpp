#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

#include "einstein_limits/expr.hpp"

namespace elim {
namespace {

constexpr int kMaxPasses = 32;
constexpr std::size_t kMaxExpandedTerms = 20000;
constexpr long kMaxExpandPower = 8;
constexpr unsigned long kTrialDivisionLimit = 100000;

Expr make_add(std::vector<Expr> terms);
Expr make_mul(std::vector<Expr> factors);
Expr make_pow(const Expr& base, const Expr& exponent);
Expr make_exp(const Expr& a);
Expr make_log(const Expr& a);
std::optional<Expr> distribute(const Number& coef, const std::vector<Expr>& factors);

/// Splits a canonical term into numeric coefficient and the remaining monomial.
std::pair<Number, Expr> split_coefficient(const Expr& t) {
  if (t.is_number()) return {t.number(), Expr(1)};
  if (t.is(Op::Mul) && t.arg(0).is_number()) {
    const auto& a = t.args();
    if (a.size() == 2) return {a[0].number(), a[1]};
    return {a[0].number(), Expr::make(Op::Mul, std::vector<Expr>(a.begin() + 1, a.end()))};
  }
  return {Number(1), t};
}

/// Factors of a canonical monomial (without coefficient).
std::vector<Expr> factors_of(const Expr& m) {
  if (m.is_one()) return {};
  if (m.is(Op::Mul)) return m.args();
  return {m};
}

/// Builds a product node from an exact/inexact coefficient and already-canonical,
/// mutually distinct factors.
Expr build_mul(const Number& coef, std::vector<Expr> factors) {
  if (coef.is_zero()) return Expr(coef);
  std::sort(factors.begin(), factors.end(), ExprLess{});
  if (factors.empty()) return Expr(coef);
  if (factors.size() == 1 && coef.is_one()) return factors[0];
  std::vector<Expr> args;
  args.reserve(factors.size() + 1);
  if (!coef.is_one()) args.emplace_back(coef);
  for (auto& f : factors) args.push_back(std::move(f));
  return Expr::make(Op::Mul, std::move(args));
}

// Numeric powers ------------------------------------------------------------

std::vector<std::pair<mpz_class, unsigned long>> factorize(mpz_class m) {
  std::vector<std::pair<mpz_class, unsigned long>> out;
  for (unsigned long p = 2; p <= kTrialDivisionLimit && m > 1; p += (p == 2 ? 1 : 2)) {
    if (mpz_class(p) * p > m) break;
    unsigned long k = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
      ++k;
    }
    if (k) out.emplace_back(mpz_class(p), k);
  }
  if (m > 1) out.emplace_back(m, 1);
  return out;
}

/// m^e for a positive integer m and non-integer rational e, as an exact
/// coefficient times radicals prime^f with f in (0,1).
void integer_radical(const mpz_class& m, const Rational& e, Rational& coef, std::vector<Expr>& radicals) {
  if (m == 1) return;
  const mpz_class& q = e.get_den();
  if (q.fits_ulong_p()) {
    mpz_class root;
    if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), q.get_ui()) != 0) {
      // exact q-th root
      if (auto r = rational_ipow(Rational(root), e.get_num().get_si())) coef *= *r;
      return;
    }
  }
  for (const auto& [prime, k] : factorize(m)) {
    Rational total = e * Rational(static_cast<long>(k));
    total.canonicalize();
    mpz_class whole;
    mpz_fdiv_q(whole.get_mpz_t(), total.get_num_mpz_t(), total.get_den_mpz_t());
    Rational frac = total - Rational(whole);
    frac.canonicalize();
    if (auto r = rational_ipow(Rational(prime), whole.get_si())) coef *= *r;
    if (sgn(frac) != 0) radicals.push_back(Expr::make(Op::Pow, {Expr(Number(Rational(prime))), Expr(Number(frac))}));
  }
}

Expr numeric_pow(const Number& b, const Number& e) {
  const Expr raw = Expr::make(Op::Pow, {Expr(b), Expr(e)});
  if (!b.is_exact() || !e.is_exact()) {
    const double x = b.to_double();
    const double y = e.to_double();
    if (x < 0 && std::floor(y) != y) return raw;
    if (x == 0 && y < 0) return raw;
    return Expr(std::pow(x, y));
  }
  const Rational& ex = e.exact();
  if (ex.get_den() == 1) {
    if (!ex.get_num().fits_slong_p()) return raw;
    auto r = rational_ipow(b.exact(), ex.get_num().get_si());
    return r ? Expr(Number(*r)) : raw;
  }
  const Rational& q = b.exact();
  if (sgn(q) < 0) return raw;
  if (sgn(q) == 0) return Expr(0);
  Rational coef(1);
  std::vector<Expr> radicals;
  integer_radical(q.get_num(), ex, coef, radicals);
  integer_radical(q.get_den(), Rational(-ex), coef, radicals);
  coef.canonicalize();
  return build_mul(Number(coef), std::move(radicals));
}

// Builders ------------------------------------------------------------------

bool is_sin_squared(const Expr& f) {
  return f.is(Op::Pow) && f.arg(0).is(Op::Sin) && f.arg(1).is_number() && f.arg(1).number() == Number(2);
}

/// c·M·sin(a)^2 + c·M·cos(a)^2 → c·M
void apply_pythagoras(std::map<Expr, Number, ExprLess>& terms, Number& constant) {
  for (;;) {
    struct Match {
      Expr sin_term, cos_term, rest;
      Number coef;
    };
    std::optional<Match> match;
    for (auto it = terms.begin(); it != terms.end() && !match; ++it) {
      const auto fs = factors_of(it->first);
      for (std::size_t i = 0; i < fs.size() && !match; ++i) {
        if (!is_sin_squared(fs[i])) continue;
        std::vector<Expr> rest;
        for (std::size_t j = 0; j < fs.size(); ++j)
          if (j != i) rest.push_back(fs[j]);
        std::vector<Expr> partner = rest;
        partner.push_back(Expr::make(Op::Pow, {Expr::make(Op::Cos, {fs[i].arg(0).arg(0)}), Expr(2)}));
        const Expr partner_m = build_mul(Number(1), partner);
        auto jt = terms.find(partner_m);
        if (jt == terms.end() || !(jt->second == it->second)) continue;
        match = Match{it->first, partner_m, build_mul(Number(1), rest), it->second};
      }
    }
    if (!match) return;
    terms.erase(match->sin_term);
    terms.erase(match->cos_term);
    if (match->rest.is_number()) {
      constant = constant + match->coef * match->rest.number();
    } else if (auto [it, inserted] = terms.emplace(match->rest, match->coef); !inserted) {
      it->second = it->second + match->coef;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
}

Expr make_add(std::vector<Expr> input) {
  std::vector<Expr> flat;
  flat.reserve(input.size());
  for (auto& t : input) {
    if (t.is(Op::Add)) {
      for (const auto& a : t.args()) flat.push_back(a);
    } else {
      flat.push_back(std::move(t));
    }
  }
  Number constant(0);
  std::map<Expr, Number, ExprLess> terms;
  for (const auto& t : flat) {
    if (t.is_number()) {
      constant = constant + t.number();
      continue;
    }
    auto [c, m] = split_coefficient(t);
    auto [it, inserted] = terms.emplace(m, c);
    if (!inserted) it->second = it->second + c;
  }
  for (auto it = terms.begin(); it != terms.end();) {
    it = it->second.is_zero() ? terms.erase(it) : std::next(it);
  }
  apply_pythagoras(terms, constant);

  std::vector<Expr> out;
  out.reserve(terms.size() + 1);
  if (!constant.is_zero()) out.emplace_back(constant);
  for (const auto& [m, c] : terms) out.push_back(build_mul(c, factors_of(m)));
  if (out.empty()) return Expr(constant.is_exact() ? Number(0) : constant);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), ExprLess{});
  return Expr::make(Op::Add, std::move(out));
}

/// Distributes a product containing sums; returns nullopt when too large.
std::optional<Expr> distribute(const Number& coef, const std::vector<Expr>& factors) {
  std::vector<Expr> plain;
  std::vector<const std::vector<Expr>*> sums;
  std::size_t count = 1;
  for (const auto& f : factors) {
    if (f.is(Op::Add)) {
      sums.push_back(&f.args());
      count *= f.args().size();
      if (count > kMaxExpandedTerms) return std::nullopt;
    } else {
      plain.push_back(f);
    }
  }
  std::vector<Expr> terms;
  terms.reserve(count);
  std::vector<std::size_t> idx(sums.size(), 0);
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<Expr> parts = plain;
    parts.emplace_back(coef);
    for (std::size_t k = 0; k < sums.size(); ++k) parts.push_back((*sums[k])[idx[k]]);
    terms.push_back(make_mul(std::move(parts)));
    for (std::size_t k = 0; k < sums.size(); ++k) {
      if (++idx[k] < sums[k]->size()) break;
      idx[k] = 0;
    }
  }
  return make_add(std::move(terms));
}

Expr make_mul(std::vector<Expr> input) {
  std::vector<Expr> pending = std::move(input);
  Number coef(1);
  std::vector<Expr> out;
  for (int round = 0; round < 8; ++round) {
    std::map<Expr, std::vector<Expr>, ExprLess> powers;
    std::vector<Expr> exp_args;
    std::vector<Expr> stack(pending.rbegin(), pending.rend());
    while (!stack.empty()) {
      Expr f = std::move(stack.back());
      stack.pop_back();
      switch (f.op()) {
        case Op::Mul:
          for (auto it = f.args().rbegin(); it != f.args().rend(); ++it) stack.push_back(*it);
          break;
        case Op::Number:
          coef = coef * f.number();
          break;
        case Op::Pow:
          powers[f.arg(0)].push_back(f.arg(1));
          break;
        case Op::Exp:
          exp_args.push_back(f.arg(0));
          break;
        default:
          powers[f].emplace_back(1);
          break;
      }
    }
    if (coef.is_zero()) return Expr(coef);

    out.clear();
    bool again = false;
    for (auto& [base, exps] : powers) {
      Expr e = exps.size() == 1 ? exps[0] : make_add(exps);
      if (e.is_zero()) continue;
      Expr p = make_pow(base, e);
      // results that may merge with other factors need another collection round
      if (p.is_number() || p.is(Op::Mul) || p.is(Op::Exp) || (p.is(Op::Pow) && p.arg(0) != base)) again = true;
      out.push_back(std::move(p));
    }
    if (!exp_args.empty()) {
      Expr s = exp_args.size() == 1 ? exp_args[0] : make_add(exp_args);
      if (!s.is_zero()) {
        Expr p = make_exp(s);
        if (!p.is(Op::Exp)) again = true;
        out.push_back(std::move(p));
      }
    }
    if (!again) break;
    pending = std::move(out);
    out.clear();
  }

  if (coef.is_zero()) return Expr(coef);
  const bool has_sum = std::any_of(out.begin(), out.end(), [](const Expr& f) { return f.is(Op::Add); });
  if (has_sum && out.size() + (coef.is_one() ? 0 : 1) > 1) {
    if (auto expanded = distribute(coef, out)) return *expanded;
  }
  return build_mul(coef, std::move(out));
}

Expr make_pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return Expr(1);
  if (exponent.is_number()) {
    const Number& e = exponent.number();
    if (base.is_number()) return numeric_pow(base.number(), e);
    if (base.is(Op::Pow)) return make_pow(base.arg(0), make_mul({base.arg(1), exponent}));
    if (base.is(Op::Exp)) return make_exp(make_mul({base.arg(0), exponent}));
    if (base.is(Op::Mul)) {
      const bool negative_coef = base.arg(0).is_number() && base.arg(0).number().is_negative();
      if (negative_coef && !e.is_integer()) return Expr::make(Op::Pow, {base, exponent});
      std::vector<Expr> parts;
      for (const auto& f : base.args()) parts.push_back(make_pow(f, exponent));
      return make_mul(std::move(parts));
    }
    if (base.is(Op::Add) && e.is_integer() && e.exact() > 1 && e.exact() <= kMaxExpandPower) {
      if (auto expanded = distribute(Number(1), std::vector<Expr>(e.exact().get_num().get_ui(), base))) return *expanded;
    }
    return Expr::make(Op::Pow, {base, exponent});
  }
  if (base.is(Op::Pow)) return make_pow(base.arg(0), make_mul({base.arg(1), exponent}));
  if (base.is(Op::Exp)) return make_exp(make_mul({base.arg(0), exponent}));
  if (base.is(Op::Mul) && !(base.arg(0).is_number() && base.arg(0).number().is_negative())) {
    std::vector<Expr> parts;
    for (const auto& f : base.args()) parts.push_back(make_pow(f, exponent));
    return make_mul(std::move(parts));
  }
  return Expr::make(Op::Pow, {base, exponent});
}

Expr make_exp(const Expr& a) {
  if (a.is_number()) {
    if (a.is_zero()) return Expr(1);
    if (!a.number().is_exact()) return Expr(std::exp(a.number().inexact()));
    return Expr::make(Op::Exp, {a});
  }
  if (a.is(Op::Log)) return a.arg(0);
  std::vector<Expr> pulled;
  std::vector<Expr> rest;
  for (const auto& t : a.is(Op::Add) ? a.args() : std::vector<Expr>{a}) {
    auto [c, m] = split_coefficient(t);
    if (m.is(Op::Log)) {
      pulled.push_back(make_pow(m.arg(0), Expr(c)));
    } else {
      rest.push_back(t);
    }
  }
  if (pulled.empty()) return Expr::make(Op::Exp, {a});
  Expr remainder = make_add(std::move(rest));
  if (!remainder.is_zero()) pulled.push_back(Expr::make(Op::Exp, {remainder}));
  return make_mul(std::move(pulled));
}

Expr make_log(const Expr& a) {
  if (a.is_number()) {
    const Number& n = a.number();
    if (n.is_one()) return Expr(0);
    if (!n.is_exact() && n.inexact() > 0) return Expr(std::log(n.inexact()));
    return Expr::make(Op::Log, {a});
  }
  if (a.is(Op::Exp)) return a.arg(0);
  if (a.is(Op::Pow)) return make_mul({a.arg(1), make_log(a.arg(0))});
  if (a.is(Op::Mul)) {
    if (a.arg(0).is_number() && a.arg(0).number().is_negative()) return Expr::make(Op::Log, {a});
    std::vector<Expr> terms;
    for (const auto& f : a.args()) terms.push_back(make_log(f));
    return make_add(std::move(terms));
  }
  return Expr::make(Op::Log, {a});
}

Expr make_trig(Op op, const Expr& a) {
  if (a.is_number()) {
    const Number& n = a.number();
    if (n.is_zero()) return Expr(op == Op::Sin ? 0 : 1);
    if (!n.is_exact()) return Expr(op == Op::Sin ? std::sin(n.inexact()) : std::cos(n.inexact()));
  }
  if (!a.is(Op::Add) && split_coefficient(a).first.is_negative()) {
    Expr flipped = make_mul({Expr(-1), a});
    if (op == Op::Sin) return make_mul({Expr(-1), Expr::make(Op::Sin, {flipped})});
    return Expr::make(Op::Cos, {flipped});
  }
  return Expr::make(op, {a});
}

class Canonicalizer {
 public:
  Expr run(const Expr& e) {
    if (e.args().empty()) return e;
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    std::vector<Expr> args;
    args.reserve(e.args().size());
    for (const auto& a : e.args()) args.push_back(run(a));
    Expr out;
    switch (e.op()) {
      case Op::Neg: out = make_mul({Expr(-1), args[0]}); break;
      case Op::Add: out = make_add(std::move(args)); break;
      case Op::Mul: out = make_mul(std::move(args)); break;
      case Op::Pow: out = make_pow(args[0], args[1]); break;
      case Op::Sqrt: out = make_pow(args[0], Expr::rational(1, 2)); break;
      case Op::Exp: out = make_exp(args[0]); break;
      case Op::Log: out = make_log(args[0]); break;
      case Op::Sin: out = make_trig(Op::Sin, args[0]); break;
      case Op::Cos: out = make_trig(Op::Cos, args[0]); break;
      default: out = e; break;
    }
    memo_.emplace(e.id(), out);
    keep_.push_back(e);
    return out;
  }

 private:
  std::unordered_map<const Node*, Expr> memo_;
  std::vector<Expr> keep_;  // pins memo keys so node addresses stay unique
};

}  // namespace

Expr simplify(const Expr& e) {
  Expr current = e;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    Canonicalizer canon;
    Expr next = canon.run(current);
    if (next == current) return next;
    current = std::move(next);
  }
  return current;
}

}  // namespace elim
