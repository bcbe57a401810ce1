#include <cmath>
#include <functional>
#include <unordered_map>

#include "einstein_limits/expr.hpp"

namespace elim {
namespace {

[[noreturn]] void domain_error(const std::string& what, const Expr& where) {
  throw EvalError("domain error: " + what + " in " + where.to_string());
}

double checked_pow(double base, double exponent, const Expr& where) {
  if (base < 0 && std::floor(exponent) != exponent) domain_error("negative base with non-integer exponent", where);
  if (base == 0 && exponent < 0) domain_error("zero raised to a negative power", where);
  return std::pow(base, exponent);
}

double checked_log(double v, const Expr& where) {
  if (!(v > 0)) domain_error("log of nonpositive value", where);
  return std::log(v);
}

double checked_sqrt(double v, const Expr& where) {
  if (v < 0) domain_error("sqrt of negative value", where);
  return std::sqrt(v);
}

}  // namespace

double eval(const Expr& e, const Bindings& bindings) {
  std::unordered_map<const Node*, double> memo;
  std::function<double(const Expr&)> ev = [&](const Expr& x) -> double {
    switch (x.op()) {
      case Op::Number: return x.number().to_double();
      case Op::Symbol: {
        auto it = bindings.find(x.name());
        if (it == bindings.end()) throw EvalError("unbound name '" + x.name() + "'");
        return it->second;
      }
      default: break;
    }
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    const auto& a = x.args();
    double v = 0;
    switch (x.op()) {
      case Op::Neg: v = -ev(a[0]); break;
      case Op::Add:
        for (const auto& t : a) v += ev(t);
        break;
      case Op::Mul:
        v = 1;
        for (const auto& t : a) v *= ev(t);
        break;
      case Op::Pow: v = checked_pow(ev(a[0]), ev(a[1]), x); break;
      case Op::Exp: v = std::exp(ev(a[0])); break;
      case Op::Log: v = checked_log(ev(a[0]), x); break;
      case Op::Sqrt: v = checked_sqrt(ev(a[0]), x); break;
      case Op::Sin: v = std::sin(ev(a[0])); break;
      case Op::Cos: v = std::cos(ev(a[0])); break;
      default: break;
    }
    memo.emplace(x.id(), v);
    return v;
  };
  return ev(e);
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
  std::function<std::size_t(const Expr&)> emit = [&](const Expr& x) -> std::size_t {
    const auto source = static_cast<std::uint32_t>(sources_.size());
    switch (x.op()) {
      case Op::Number:
        program_.push_back({Code::Const, 0, x.number().to_double(), source});
        sources_.push_back(x);
        return 1;
      case Op::Symbol: {
        std::size_t slot = slots.size();
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == x.name()) {
            slot = i;
            break;
          }
        }
        if (slot == slots.size()) throw EvalError("unbound name '" + x.name() + "'");
        program_.push_back({Code::Slot, static_cast<std::uint32_t>(slot), 0.0, source});
        sources_.push_back(x);
        return 1;
      }
      default: break;
    }
    std::size_t depth = 0;
    for (std::size_t i = 0; i < x.args().size(); ++i) depth = std::max(depth, i + emit(x.arg(i)));
    Code code = Code::Const;
    switch (x.op()) {
      case Op::Neg: code = Code::Neg; break;
      case Op::Add: code = Code::Add; break;
      case Op::Mul: code = Code::Mul; break;
      case Op::Pow: code = Code::Pow; break;
      case Op::Exp: code = Code::Exp; break;
      case Op::Log: code = Code::Log; break;
      case Op::Sqrt: code = Code::Sqrt; break;
      case Op::Sin: code = Code::Sin; break;
      case Op::Cos: code = Code::Cos; break;
      default: break;
    }
    program_.push_back({code, static_cast<std::uint32_t>(x.args().size()), 0.0, static_cast<std::uint32_t>(sources_.size())});
    sources_.push_back(x);
    return depth;
  };
  max_depth_ = emit(e);
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (program_.empty()) return 0.0;
  std::vector<double> stack;
  stack.reserve(max_depth_ + 1);
  for (const auto& ins : program_) {
    switch (ins.code) {
      case Code::Const: stack.push_back(ins.value); break;
      case Code::Slot: stack.push_back(values[ins.count]); break;
      case Code::Neg: stack.back() = -stack.back(); break;
      case Code::Add: {
        double v = 0;
        for (std::uint32_t i = 0; i < ins.count; ++i) v += stack[stack.size() - ins.count + i];
        stack.resize(stack.size() - ins.count);
        stack.push_back(v);
        break;
      }
      case Code::Mul: {
        double v = 1;
        for (std::uint32_t i = 0; i < ins.count; ++i) v *= stack[stack.size() - ins.count + i];
        stack.resize(stack.size() - ins.count);
        stack.push_back(v);
        break;
      }
      case Code::Pow: {
        const double ex = stack.back();
        stack.pop_back();
        stack.back() = checked_pow(stack.back(), ex, sources_[ins.source]);
        break;
      }
      case Code::Exp: stack.back() = std::exp(stack.back()); break;
      case Code::Log: stack.back() = checked_log(stack.back(), sources_[ins.source]); break;
      case Code::Sqrt: stack.back() = checked_sqrt(stack.back(), sources_[ins.source]); break;
      case Code::Sin: stack.back() = std::sin(stack.back()); break;
      case Code::Cos: stack.back() = std::cos(stack.back()); break;
    }
  }
  return stack.back();
}

}  // namespace elim
