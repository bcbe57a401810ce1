#include "einstein_limits/expr.hpp"

#include <functional>
#include <ostream>
#include <unordered_map>

namespace elim {
namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::shared_ptr<const Node> make_node(Op op, Number number, std::string name, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->number = std::move(number);
  n->name = std::move(name);
  n->args = std::move(args);
  std::size_t h = static_cast<std::size_t>(op) * 0x100000001b3ULL + 0xcbf29ce484222325ULL;
  std::size_t size = 1;
  if (op == Op::Number) h = mix(h, n->number.hash());
  if (op == Op::Symbol) h = mix(h, std::hash<std::string>{}(n->name));
  for (const auto& a : n->args) {
    h = mix(h, a.hash());
    size += a.size();
  }
  n->hash = h;
  n->size = size;
  return n;
}

int op_rank(Op op) {
  switch (op) {
    case Op::Number: return 0;
    case Op::Symbol: return 1;
    default: return 2;
  }
}

int deep_compare(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return 0;
  if (a.op() != b.op()) return static_cast<int>(a.op()) < static_cast<int>(b.op()) ? -1 : 1;
  if (a.is_number()) return Number::compare(a.number(), b.number());
  if (a.is_symbol()) return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
  if (a.args().size() != b.args().size()) return a.args().size() < b.args().size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    if (int c = compare(a.arg(i), b.arg(i)); c != 0) return c;
  }
  return 0;
}

// Printing ------------------------------------------------------------------

enum Prec { kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5 };

std::string print(const Expr& e, int& prec);

std::string wrap(const Expr& e, int min_prec) {
  int p = 0;
  std::string s = print(e, p);
  return p < min_prec ? "(" + s + ")" : s;
}

bool negative_exponent(const Expr& f) {
  return f.is(Op::Pow) && f.arg(1).is_number() && f.arg(1).number().is_negative();
}

std::string print_mul(const Expr& e, int& prec) {
  std::vector<std::string> num;
  std::vector<std::string> den;
  bool negate = false;
  for (const auto& f : e.args()) {
    if (f.is_number()) {
      const Number& c = f.number();
      Number mag = c.is_negative() ? -c : c;
      negate = negate != c.is_negative();
      if (mag.is_exact()) {
        const auto& q = mag.exact();
        if (q.get_num() != 1) num.push_back(q.get_num().get_str());
        if (q.get_den() != 1) den.push_back(q.get_den().get_str());
      } else {
        num.push_back(mag.to_string());
      }
      continue;
    }
    if (negative_exponent(f)) {
      Number pos = -f.arg(1).number();
      if (pos.is_one()) {
        den.push_back(wrap(f.arg(0), kPow));
      } else {
        den.push_back(wrap(f.arg(0), kPow + 1) + "^" + wrap(Expr(pos), kAtom));
      }
      continue;
    }
    num.push_back(wrap(f, kMul + 1));
  }
  std::string s;
  for (std::size_t i = 0; i < num.size(); ++i) s += (i ? "*" : "") + num[i];
  if (s.empty()) s = "1";
  if (!den.empty()) {
    std::string d;
    for (std::size_t i = 0; i < den.size(); ++i) d += (i ? "*" : "") + den[i];
    s += "/" + (den.size() > 1 ? "(" + d + ")" : d);
  }
  if (negate) {
    prec = kUnary;
    return "-" + s;
  }
  prec = kMul;
  return s;
}

std::string print(const Expr& e, int& prec) {
  switch (e.op()) {
    case Op::Number: {
      const Number& n = e.number();
      if (n.is_negative()) {
        prec = kUnary;
        return "-" + (-n).to_string();
      }
      prec = (n.is_exact() && !n.is_integer()) ? kMul : kAtom;
      return n.to_string();
    }
    case Op::Symbol:
      prec = kAtom;
      return e.name();
    case Op::Neg:
      prec = kUnary;
      return "-" + wrap(e.arg(0), kUnary);
    case Op::Add: {
      std::string s;
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        int p = 0;
        std::string t = print(e.arg(i), p);
        if (i == 0) {
          s = t;
        } else if (!t.empty() && t[0] == '-' && p == kUnary) {
          s += " - " + t.substr(1);
        } else {
          s += " + " + t;
        }
      }
      prec = kAdd;
      return s;
    }
    case Op::Mul:
      return print_mul(e, prec);
    case Op::Pow: {
      prec = kPow;
      // right-associative: the base needs parentheses when it is itself a power
      return wrap(e.arg(0), kAtom) + "^" + wrap(e.arg(1), kAtom);
    }
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Sin:
    case Op::Cos: {
      static const char* names[] = {"exp", "log", "sqrt", "sin", "cos"};
      prec = kAtom;
      int p = 0;
      return std::string(names[static_cast<int>(e.op()) - static_cast<int>(Op::Exp)]) + "(" + print(e.arg(0), p) + ")";
    }
  }
  return {};
}

}  // namespace

Expr::Expr() : Expr(Number(0)) {}
Expr::Expr(int v) : Expr(Number(v)) {}
Expr::Expr(long v) : Expr(Number(v)) {}
Expr::Expr(const Number& n) : node_(make_node(Op::Number, n, {}, {})) {}
Expr::Expr(double v) : Expr(Number(v)) {}

Expr Expr::symbol(std::string name) { return Expr(make_node(Op::Symbol, Number(0), std::move(name), {})); }

Expr Expr::make(Op op, std::vector<Expr> args) { return Expr(make_node(op, Number(0), {}, std::move(args))); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return deep_compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return 0;
  const int ra = op_rank(a.op());
  const int rb = op_rank(b.op());
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra < 2) return deep_compare(a, b);
  if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
  return deep_compare(a, b);
}

std::string Expr::to_string() const {
  int p = 0;
  return print(*this, p);
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.to_string(); }

Expr operator-(const Expr& a) { return Expr::make(Op::Neg, {a}); }
Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Op::Add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Op::Add, {a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Op::Mul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Op::Mul, {a, pow(b, Expr(-1))}); }

Expr pow(const Expr& base, const Expr& exponent) { return Expr::make(Op::Pow, {base, exponent}); }
Expr exp(const Expr& a) { return Expr::make(Op::Exp, {a}); }
Expr log(const Expr& a) { return Expr::make(Op::Log, {a}); }
Expr sqrt(const Expr& a) { return Expr::make(Op::Sqrt, {a}); }
Expr sin(const Expr& a) { return Expr::make(Op::Sin, {a}); }
Expr cos(const Expr& a) { return Expr::make(Op::Cos, {a}); }

Expr sum(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr(0);
  if (terms.size() == 1) return terms[0];
  return Expr::make(Op::Add, terms);
}

Expr product(const std::vector<Expr>& factors) {
  if (factors.empty()) return Expr(1);
  if (factors.size() == 1) return factors[0];
  return Expr::make(Op::Mul, factors);
}

std::set<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  std::unordered_map<const Node*, bool> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (!seen.emplace(x.id(), true).second) return;
    if (x.is_symbol()) out.insert(x.name());
    for (const auto& a : x.args()) walk(a);
  };
  walk(e);
  return out;
}

bool depends_on(const Expr& e, std::string_view name) {
  std::unordered_map<const Node*, bool> memo;
  std::function<bool(const Expr&)> walk = [&](const Expr& x) -> bool {
    if (x.is_symbol()) return x.name() == name;
    if (x.args().empty()) return false;
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    bool found = false;
    for (const auto& a : x.args()) {
      if (walk(a)) {
        found = true;
        break;
      }
    }
    memo[x.id()] = found;
    return found;
  };
  return walk(e);
}

Expr substitute(const Expr& e, const Replacements& replacements) {
  if (replacements.empty()) return e;
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> walk = [&](const Expr& x) -> Expr {
    if (x.is_symbol()) {
      auto it = replacements.find(x.name());
      return it == replacements.end() ? x : it->second;
    }
    if (x.args().empty()) return x;
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    std::vector<Expr> args;
    args.reserve(x.args().size());
    bool changed = false;
    for (const auto& a : x.args()) {
      args.push_back(walk(a));
      changed = changed || args.back().id() != a.id();
    }
    Expr out = changed ? Expr::make(x.op(), std::move(args)) : x;
    memo.emplace(x.id(), out);
    return out;
  };
  return walk(e);
}

}  // namespace elim
