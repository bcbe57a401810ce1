#include <functional>
#include <unordered_map>

#include "einstein_limits/expr.hpp"

namespace elim {

Expr differentiate(const Expr& e, std::string_view var) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> d = [&](const Expr& x) -> Expr {
    if (x.is_number()) return Expr(0);
    if (x.is_symbol()) return Expr(x.name() == var ? 1 : 0);
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    if (!depends_on(x, var)) {
      memo.emplace(x.id(), Expr(0));
      return Expr(0);
    }
    Expr out;
    const auto& a = x.args();
    switch (x.op()) {
      case Op::Neg:
        out = -d(a[0]);
        break;
      case Op::Add: {
        std::vector<Expr> terms;
        for (const auto& t : a) {
          Expr dt = d(t);
          if (!dt.is_zero()) terms.push_back(dt);
        }
        out = sum(terms);
        break;
      }
      case Op::Mul: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < a.size(); ++i) {
          Expr di = d(a[i]);
          if (di.is_zero()) continue;
          std::vector<Expr> factors;
          for (std::size_t j = 0; j < a.size(); ++j) factors.push_back(j == i ? di : a[j]);
          terms.push_back(product(factors));
        }
        out = sum(terms);
        break;
      }
      case Op::Pow: {
        const Expr& base = a[0];
        const Expr& expo = a[1];
        if (!depends_on(expo, var)) {
          out = expo * pow(base, expo - Expr(1)) * d(base);
        } else {
          out = x * (d(expo) * log(base) + expo * d(base) / base);
        }
        break;
      }
      case Op::Exp: out = x * d(a[0]); break;
      case Op::Log: out = d(a[0]) / a[0]; break;
      case Op::Sqrt: out = d(a[0]) / (Expr(2) * x); break;
      case Op::Sin: out = cos(a[0]) * d(a[0]); break;
      case Op::Cos: out = -(sin(a[0]) * d(a[0])); break;
      default: out = Expr(0); break;
    }
    memo.emplace(x.id(), out);
    return out;
  };
  return simplify(d(e));
}

}  // namespace elim
