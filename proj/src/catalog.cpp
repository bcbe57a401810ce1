#include "einstein_limits/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace elim {
namespace {

const Expr kTheta = Expr::symbol("theta");

double constant_value(const Expr& e, const char* what) {
  try {
    return eval(e, {});
  } catch (const EvalError&) {
    throw CatalogError(std::string(what) + " must be a numeric constant, got " + e.to_string());
  }
}

void require_theta_only(const Expr& profile, const std::string& what) {
  for (const auto& s : free_symbols(profile))
    if (s != "theta") throw CatalogError(what + " may depend on theta only, found '" + s + "'");
}

Rational decimal_to_rational(std::string_view text) {
  std::string digits;
  long frac_len = 0;
  bool seen_point = false;
  bool negative = false;
  std::size_t i = 0;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) ++frac_len;
    } else {
      throw CatalogError("malformed exponent '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw CatalogError("malformed exponent '" + std::string(text) + "'");
  mpz_class num(digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac_len));
  Rational r(negative ? mpz_class(-num) : num, den);
  r.canonicalize();
  return r;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Expr sqrt5() { return pow(Expr(5), Expr::rational(1, 2)); }

// (4/(K√5))·C∞^{1/2}
Expr twist_coefficient(const T2Constants& c) {
  return Expr(4) * pow(c.K * sqrt5(), Expr(-1)) * pow(c.Cinf, Expr::rational(1, 2));
}

// (2/√5)·C∞^{1/2}
Expr ainv_coefficient(const T2Constants& c) {
  return Expr(2) * pow(sqrt5(), Expr(-1)) * pow(c.Cinf, Expr::rational(1, 2));
}

}  // namespace

Metric minkowski(int n) {
  if (n < 1) throw CatalogError("Minkowski needs n >= 1 spatial dimensions (spacetime dimension >= 2)");
  std::vector<std::string> coords{"t"};
  std::vector<Expr> diag{Expr(-1)};
  for (int k = 1; k <= n; ++k) {
    coords.push_back("x" + std::to_string(k));
    diag.push_back(Expr(1));
  }
  return Metric::diagonal(Chart(coords), diag);
}

KasnerParams parse_kasner_exponents(std::string_view text) {
  KasnerParams p;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.find_first_of(".eE") != std::string::npos) {
      p.exponents.push_back(decimal_to_rational(t));
      continue;
    }
    Expr e;
    try {
      e = simplify(parse(t));
    } catch (const ParseError& err) {
      throw CatalogError(std::string("malformed exponent: ") + err.what());
    }
    if (!e.is_number() || !e.number().is_exact()) throw CatalogError("Kasner exponent '" + t + "' is not a rational number");
    p.exponents.push_back(e.number().exact());
  }
  if (p.exponents.empty()) throw CatalogError("no Kasner exponents given");
  return p;
}

Metric kasner_unchecked(const KasnerParams& params) {
  const std::size_t n = params.exponents.size();
  if (n < 1) throw CatalogError("Kasner needs at least one exponent");
  const Expr t = Expr::symbol("t");
  std::vector<std::string> coords{"t"};
  std::vector<Expr> diag{Expr::rational(-1, static_cast<long>(n * n))};
  for (std::size_t k = 0; k < n; ++k) {
    coords.push_back("x" + std::to_string(k + 1));
    diag.push_back(pow(t, Expr(Number(Rational(2 * params.exponents[k])))));
  }
  Chart chart(coords);
  return Metric::diagonal(chart, diag);
}

Metric kasner(const KasnerParams& params) {
  Rational s1 = 0;
  Rational s2 = 0;
  for (const auto& p : params.exponents) {
    s1 += p;
    s2 += p * p;
  }
  if (s1 != 1 || s2 != 1)
    throw CatalogError("Kasner exponents must satisfy sum p = 1 and sum p^2 = 1; got sum p = " + s1.get_str() +
                       ", sum p^2 = " + s2.get_str());
  return kasner_unchecked(params);
}

// ---------------------------------------------------------------------------

void validate(const T2ModelParams& params) {
  const double k = constant_value(params.K, "K");
  const double cinf = constant_value(params.Cinf, "Cinf");
  constant_value(params.CU, "CU");
  if (k == 0) throw CatalogError("twist constant K must be nonzero (K = 0 is the Gowdy case)");
  if (!(cinf > 0)) throw CatalogError("Cinf must be positive");
  require_theta_only(params.L, "profile L");
  require_theta_only(params.G, "profile G");
  const CompiledExpr l(params.L, {"theta"});
  for (int i = 0; i <= 512; ++i) {
    const double th = -2 * std::numbers::pi + 4 * std::numbers::pi * i / 512.0;
    const double v = l(std::span<const double>(&th, 1));
    if (!(v > 0)) throw CatalogError("profile L must be positive; L(" + std::to_string(th) + ") = " + std::to_string(v));
  }
}

T2Constants constants_of(const T2ModelParams& params) {
  if (!params.symbolic_constants) return {params.K, params.CU, params.Cinf, {}};
  return {Expr::symbol("K"),
          Expr::symbol("CU"),
          Expr::symbol("Cinf"),
          {{"K", eval(params.K, {})}, {"CU", eval(params.CU, {})}, {"Cinf", eval(params.Cinf, {})}}};
}

Metric t2_general(const Chart& chart, const T2Functions& f, const Expr& radius, Bindings defaults) {
  if (chart.dim() != 4) throw CatalogError("T2-symmetric form needs a 4-dimensional chart");
  const Expr e2u = exp(Expr(2) * f.U);
  const Expr em2u = exp(Expr(-2) * f.U);
  const Expr conformal = f.exp_2eta * em2u;
  const Expr r2 = pow(radius, Expr(2));
  std::vector<Expr> c(16, Expr(0));
  c[0] = -conformal;
  c[5] = conformal * pow(f.ainv, Expr(2)) + e2u * pow(f.G, Expr(2)) + em2u * r2 * pow(f.H, Expr(2));
  c[6] = c[9] = e2u * f.G;
  c[7] = c[13] = em2u * r2 * f.H;
  c[10] = e2u;
  c[15] = em2u * r2;
  return Metric(chart, std::move(c), std::move(defaults));
}

T2Functions t2_leading_functions(const T2ModelParams& params, const Expr& radius) {
  const T2Constants c = constants_of(params);
  const Expr root_r = pow(radius, Expr::rational(1, 2));
  return {pow(c.K, Expr(-2)) * pow(radius, Expr(2)), c.CU, ainv_coefficient(c) * root_r * params.L, params.G,
          twist_coefficient(c) * root_r * params.L};
}

Metric t2_model(const T2ModelParams& params) {
  validate(params);
  const T2Constants c = constants_of(params);
  const Expr t = Expr::symbol("t");
  const Expr e2u = exp(Expr(2) * c.CU);
  const Expr em2u = exp(Expr(-2) * c.CU);
  const Expr kinv2 = pow(c.K, Expr(-2));
  const Expr twist = twist_coefficient(c) * params.L * pow(t, Expr::rational(1, 4));
  std::vector<Expr> g(16, Expr(0));
  g[0] = Expr::rational(-1, 4) * kinv2 * em2u;
  g[5] = Expr::rational(4, 5) * kinv2 * em2u * c.Cinf * pow(params.L, Expr(2)) * pow(t, Expr::rational(3, 2)) +
         e2u * pow(params.G, Expr(2)) + em2u * t * pow(twist, Expr(2));
  g[6] = g[9] = e2u * params.G;
  g[7] = g[13] = em2u * t * twist;
  g[10] = e2u;
  g[15] = em2u * t;
  return Metric(Chart({"t", "theta", "x", "y"}), std::move(g), c.defaults);
}

T2Functions t2_limit_functions(const T2ModelParams& params) {
  const T2Constants c = constants_of(params);
  const Expr r = Expr::symbol("Rhat");
  const Expr root_r = pow(r, Expr::rational(1, 2));
  return {pow(c.K, Expr(-2)) * pow(r, Expr(2)), c.CU, ainv_coefficient(c) * root_r, Expr(0),
          twist_coefficient(c) * root_r};
}

Metric t2_limit(const T2ModelParams& params) {
  validate(params);
  return t2_general(Chart({"Rhat", "thetahat", "xhat", "yhat"}), t2_limit_functions(params), Expr::symbol("Rhat"),
                    constants_of(params).defaults);
}

Metric t2_limit_u(const T2ModelParams& params) {
  validate(params);
  const T2Constants c = constants_of(params);
  const Expr u = Expr::symbol("u");
  const Expr e2u = exp(Expr(2) * c.CU);
  const Expr em2u = exp(Expr(-2) * c.CU);
  const Expr kinv2 = pow(c.K, Expr(-2));
  const Expr twist = twist_coefficient(c) * pow(u, Expr::rational(1, 4));
  std::vector<Expr> g(16, Expr(0));
  g[0] = Expr::rational(-1, 4) * kinv2 * em2u;
  g[5] = Expr::rational(4, 5) * kinv2 * em2u * c.Cinf * pow(u, Expr::rational(3, 2)) + em2u * u * pow(twist, Expr(2));
  g[7] = g[13] = em2u * u * twist;
  g[10] = e2u;
  g[15] = em2u * u;
  return Metric(Chart({"u", "thetahat", "xhat", "yhat"}), std::move(g), c.defaults);
}

// ---------------------------------------------------------------------------

std::string to_string(PerturbedFunction f) {
  switch (f) {
    case PerturbedFunction::Eta: return "eta";
    case PerturbedFunction::U: return "U";
    case PerturbedFunction::AInv: return "ainv";
    case PerturbedFunction::G: return "G";
    case PerturbedFunction::H: return "H";
  }
  return {};
}

PerturbedFunction parse_perturbed_function(std::string_view name) {
  for (auto f : {PerturbedFunction::Eta, PerturbedFunction::U, PerturbedFunction::AInv, PerturbedFunction::G,
                 PerturbedFunction::H})
    if (to_string(f) == name) return f;
  throw CatalogError("unknown metric function '" + std::string(name) + "' (expected eta, U, ainv, G or H)");
}

std::optional<double> perturbation_allowance(const Perturbation& p) {
  switch (p.target) {
    case PerturbedFunction::Eta: return depends_on(p.profile, "theta") ? -0.5 : -0.25;
    case PerturbedFunction::U: return -0.5;
    case PerturbedFunction::AInv: return -1.0;
    case PerturbedFunction::H: return 0.25;
    case PerturbedFunction::G: return std::nullopt;
  }
  return std::nullopt;
}

void validate(const Perturbation& p) {
  require_theta_only(p.profile, "perturbation profile");
  if (!p.exponent.is_number()) throw CatalogError("perturbation exponent must be a number");
  const auto allowance = perturbation_allowance(p);
  if (!allowance) {
    if (!simplify(p.profile).is_zero())
      throw CatalogError("G admits no perturbation: it equals its leading profile exactly");
    return;
  }
  const double e = p.exponent.number().to_double();
  if (e > *allowance)
    throw CatalogError("perturbation of " + to_string(p.target) + " decays too slowly: exponent " +
                       p.exponent.to_string() + " exceeds the allowed " + Expr(Number(*allowance)).to_string());
}

Metric apply_perturbation(const T2ModelParams& params, const std::vector<Perturbation>& perturbations) {
  if (perturbations.empty()) return t2_model(params);
  validate(params);
  for (const auto& p : perturbations) validate(p);
  const Expr t = Expr::symbol("t");
  const Expr radius = pow(t, Expr::rational(1, 2));
  T2Functions f = t2_leading_functions(params, radius);
  for (const auto& p : perturbations) {
    const Expr shift = p.profile * pow(t, p.exponent * Expr::rational(1, 2));
    switch (p.target) {
      case PerturbedFunction::Eta: f.exp_2eta = f.exp_2eta * exp(Expr(2) * shift); break;
      case PerturbedFunction::U: f.U = f.U + shift; break;
      case PerturbedFunction::AInv: f.ainv = f.ainv + shift; break;
      case PerturbedFunction::G: break;  // only the zero profile gets here
      case PerturbedFunction::H: f.H = f.H + shift; break;
    }
  }
  Metric radial = t2_general(Chart({"t", "theta", "x", "y"}), f, radius, constants_of(params).defaults);
  // dR = dt / (2√t)
  std::vector<Expr> c = radial.components();
  c[0] = c[0] * pow(Expr(4) * t, Expr(-1));
  return Metric(radial.chart(), std::move(c), radial.defaults());
}

// ---------------------------------------------------------------------------

Metric parse_metric_definition(std::string_view text) {
  std::vector<std::string> coords;
  Signature signature = Signature::Lorentzian;
  Bindings defaults;
  std::vector<std::pair<std::string, CoordinateRange>> ranges;
  std::vector<std::tuple<std::string, std::string, Expr>> entries;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> CatalogError {
    return CatalogError("metric definition line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("coordinates:", 0) == 0) {
      std::istringstream names(line.substr(12));
      std::string n;
      while (names >> n) coords.push_back(n);
    } else if (line.rfind("signature:", 0) == 0) {
      const std::string s = trim(line.substr(10));
      if (s == "lorentzian") signature = Signature::Lorentzian;
      else if (s == "riemannian") signature = Signature::Riemannian;
      else throw fail("unknown signature '" + s + "'");
    } else if (line.rfind("param ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw fail("expected 'param NAME = VALUE'");
      try {
        defaults[trim(line.substr(6, eq - 6))] = eval(parse(line.substr(eq + 1)), {});
      } catch (const std::exception& e) {
        throw fail(e.what());
      }
    } else if (line.rfind("range ", 0) == 0) {
      std::istringstream r(line.substr(6));
      std::string name, eq;
      double lo = 0, hi = 0;
      if (!(r >> name >> eq >> lo >> hi) || eq != "=") throw fail("expected 'range NAME = LO HI'");
      ranges.emplace_back(name, CoordinateRange{lo, hi});
    } else if (line.rfind("g[", 0) == 0) {
      const auto close = line.find(']');
      const auto comma = line.find(',');
      const auto eq = line.find('=', close == std::string::npos ? 0 : close);
      if (close == std::string::npos || comma == std::string::npos || comma > close || eq == std::string::npos)
        throw fail("expected 'g[a,b] = EXPR'");
      try {
        entries.emplace_back(trim(line.substr(2, comma - 2)), trim(line.substr(comma + 1, close - comma - 1)),
                             parse(line.substr(eq + 1)));
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
    } else {
      throw fail("unrecognised line '" + line + "'");
    }
  }
  if (coords.empty()) throw CatalogError("metric definition has no 'coordinates:' line");
  Chart chart;
  try {
    chart = Chart(coords);
  } catch (const GeometryError& e) {
    throw CatalogError(e.what());
  }
  for (const auto& [name, r] : ranges) {
    const auto i = chart.index_of(name);
    if (!i) throw CatalogError("range given for unknown coordinate '" + name + "'");
    chart.set_range(*i, r);
  }
  const std::size_t n = chart.dim();
  std::vector<Expr> c(n * n, Expr(0));
  std::vector<bool> set(n * n, false);
  for (const auto& [a, b, e] : entries) {
    const auto i = chart.index_of(a);
    const auto j = chart.index_of(b);
    if (!i || !j) throw CatalogError("component g[" + a + "," + b + "] names an unknown coordinate");
    for (auto off : {*i * n + *j, *j * n + *i}) {
      if (set[off] && simplify(c[off] - e) != Expr(0))
        throw CatalogError("component g[" + a + "," + b + "] given twice with different values");
      c[off] = e;
      set[off] = true;
    }
  }
  try {
    return Metric(chart, std::move(c), std::move(defaults), signature);
  } catch (const GeometryError& e) {
    throw CatalogError(e.what());
  }
}

std::string write_metric_definition(const Metric& g) {
  std::ostringstream out;
  const Chart& chart = g.chart();
  out << "coordinates:";
  for (const auto& c : chart.coordinates()) out << ' ' << c;
  out << "\nsignature: " << (g.signature() == Signature::Lorentzian ? "lorentzian" : "riemannian") << '\n';
  for (const auto& [k, v] : g.defaults()) out << "param " << k << " = " << Expr(v).to_string() << '\n';
  for (std::size_t i = 0; i < chart.dim(); ++i) {
    if (!chart.has_range(i)) continue;
    const auto r = chart.range(i);
    out << "range " << chart.coordinate(i) << " = " << Expr(r.lo).to_string() << ' ' << Expr(r.hi).to_string() << '\n';
  }
  for (std::size_t a = 0; a < chart.dim(); ++a)
    for (std::size_t b = a; b < chart.dim(); ++b) {
      if (g(a, b).is_zero()) continue;
      out << "g[" << chart.coordinate(a) << ',' << chart.coordinate(b) << "] = " << g(a, b).to_string() << '\n';
    }
  return out.str();
}

}  // namespace elim
