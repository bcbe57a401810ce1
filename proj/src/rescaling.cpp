#include "einstein_limits/rescaling.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "einstein_limits/parallel.hpp"

namespace elim {
namespace {

const Expr kTi = Expr::symbol("ti");
const Expr kC = Expr::symbol("c");

Expr determinant(const std::vector<std::vector<Expr>>& m, std::vector<std::size_t> cols, std::size_t row = 0) {
  if (cols.empty()) return Expr(1);
  std::vector<Expr> terms;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Expr& entry = m[row][cols[k]];
    if (entry.is_zero()) continue;
    auto rest = cols;
    rest.erase(rest.begin() + static_cast<long>(k));
    const Expr sub = determinant(m, rest, row + 1);
    if (sub.is_zero()) continue;
    terms.push_back(k % 2 ? -(entry * sub) : entry * sub);
  }
  return simplify(sum(terms));
}

std::string basepoint_symbol(const std::string& coord) { return coord + "_i"; }

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("rescaling plan needs at least one basepoint time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0)) throw std::invalid_argument("basepoint times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("basepoint times must be increasing");
  }
}

std::vector<CoordinateRange> box_for(RescalingKind kind, std::size_t dim, int j) {
  const double jj = j;
  std::vector<CoordinateRange> box;
  box.push_back(kind == RescalingKind::TypeIII ? CoordinateRange{1.0 / jj, jj} : CoordinateRange{-jj, jj});
  for (std::size_t i = 1; i < dim; ++i) box.push_back({-jj, jj});
  return box;
}

}  // namespace

// Pullback ------------------------------------------------------------------

Metric pullback(const Metric& g, const Chart& new_chart, const std::vector<Expr>& old_in_new, const Expr& scale,
                const Bindings& extra_defaults) {
  const std::size_t n = g.dim();
  if (old_in_new.size() != n) throw RescalingError("pullback map needs one expression per old coordinate");
  if (new_chart.dim() != n) throw RescalingError("pullback between charts of different dimension");
  Replacements sub;
  for (std::size_t a = 0; a < n; ++a) sub.emplace(g.chart().coordinate(a), old_in_new[a]);

  std::vector<std::vector<Expr>> jac(n, std::vector<Expr>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t m = 0; m < n; ++m) jac[a][m] = differentiate(old_in_new[a], new_chart.coordinate(m));
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  if (determinant(jac, cols).is_zero()) throw RescalingError("pullback map has a singular Jacobian");

  std::vector<Expr> moved(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      moved[a * n + b] = moved[b * n + a] = g(a, b).is_zero() ? Expr(0) : substitute(g(a, b), sub);

  std::vector<Expr> out(n * n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t v = m; v < n; ++v) {
      std::vector<Expr> terms;
      for (std::size_t a = 0; a < n; ++a) {
        if (jac[a][m].is_zero()) continue;
        for (std::size_t b = 0; b < n; ++b) {
          if (jac[b][v].is_zero() || moved[a * n + b].is_zero()) continue;
          terms.push_back(jac[a][m] * jac[b][v] * moved[a * n + b]);
        }
      }
      out[m * n + v] = out[v * n + m] = terms.empty() ? Expr(0) : simplify(scale * sum(terms));
    }

  Bindings defaults = g.defaults();
  for (const auto& c : g.chart().coordinates()) defaults.erase(c);
  for (const auto& [k, v] : extra_defaults) defaults[k] = v;
  return Metric(new_chart, std::move(out), std::move(defaults), g.signature());
}

// Numeric fields --------------------------------------------------------------

CompiledMetric::CompiledMetric(const Metric& g, const Bindings& bindings) : dim_(g.dim()) {
  slots_ = g.chart().coordinates();
  for (const auto& p : g.parameters()) {
    slots_.push_back(p);
    auto it = bindings.find(p);
    if (it == bindings.end()) it = g.defaults().find(p);
    if (it == g.defaults().end()) throw EvalError("unbound name '" + p + "'");
    parameter_values_.push_back(it->second);
  }
  for (const auto& c : g.components()) code_.emplace_back(c, slots_);
}

Eigen::MatrixXd CompiledMetric::at(std::span<const double> x) const {
  std::vector<double> values(x.begin(), x.end());
  values.insert(values.end(), parameter_values_.begin(), parameter_values_.end());
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) m(a, b) = m(b, a) = code_[a * n + b](values);
  return m;
}

AxisPullback::AxisPullback(std::shared_ptr<const MetricField> g, std::vector<AxisMap> axes, double scale)
    : g_(std::move(g)), axes_(std::move(axes)), scale_(scale) {
  if (axes_.size() != g_->dim()) throw RescalingError("axis pullback needs one map per coordinate");
}

Eigen::MatrixXd AxisPullback::at(std::span<const double> x) const {
  const std::size_t n = dim();
  std::vector<double> old(n);
  Eigen::VectorXd jac(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto [value, derivative] = axes_[a](x[a]);
    old[a] = value;
    jac(static_cast<Eigen::Index>(a)) = derivative;
  }
  return scale_ * jac.asDiagonal() * g_->at(old) * jac.asDiagonal();
}

ImplicitAxis::ImplicitAxis(const Expr& density, std::string variable, double factor)
    : density_(density, {std::move(variable)}), factor_(factor) {}

double ImplicitAxis::primitive(double old_value) const {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [this](double v) { return density_(std::span<const double>(&v, 1)); };
  return gauss_kronrod<double, 31>::integrate(f, 0.0, old_value, 20, 1e-14);
}

std::pair<double, double> ImplicitAxis::solve(double new_value) const {
  const double target = factor_ * new_value;
  auto f = [&](double v) { return primitive(v) - target; };
  const double origin = 0.0;
  const double rate = density_(std::span<const double>(&origin, 1));
  const double guess = target / rate;
  double step = std::max(1.0, std::abs(guess)) * 0.25;
  double lo = guess - step;
  double hi = guess + step;
  double flo = f(lo);
  double fhi = f(hi);
  for (int k = 0; flo > 0 && k < 200; ++k) {
    lo -= step;
    step *= 2;
    flo = f(lo);
  }
  for (int k = 0; fhi < 0 && k < 200; ++k) {
    hi += step;
    step *= 2;
    fhi = f(hi);
  }
  if (flo > 0 || fhi < 0) throw RescalingError("could not bracket the implicit coordinate map");
  double root;
  if (flo == 0) {
    root = lo;
  } else if (fhi == 0) {
    root = hi;
  } else {
    std::uintmax_t iterations = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, std::abs(a)); };
    const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iterations);
    root = 0.5 * (bracket.first + bracket.second);
  }
  const double d = density_(std::span<const double>(&root, 1));
  return {root, factor_ / d};
}

void ImplicitAxis::prime(const std::vector<double>& new_values) {
  for (double v : new_values) {
    auto it = std::lower_bound(cache_.begin(), cache_.end(), v,
                               [](const auto& entry, double key) { return entry.first < key; });
    if (it != cache_.end() && it->first == v) continue;
    cache_.insert(it, {v, solve(v)});
  }
}

std::pair<double, double> ImplicitAxis::operator()(double new_value) const {
  auto it = std::lower_bound(cache_.begin(), cache_.end(), new_value,
                             [](const auto& entry, double key) { return entry.first < key; });
  if (it != cache_.end() && it->first == new_value) return it->second;
  return solve(new_value);
}

// Grids -----------------------------------------------------------------------

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (std::size_t i = 0; i < box.size(); ++i) s *= static_cast<std::size_t>(points_per_axis);
  return s;
}

std::vector<double> GridSpec::axis(std::size_t i) const {
  const auto r = box.at(i);
  std::vector<double> v;
  if (points_per_axis == 1) return {0.5 * (r.lo + r.hi)};
  for (int k = 0; k < points_per_axis; ++k) v.push_back(r.lo + (r.hi - r.lo) * k / (points_per_axis - 1));
  return v;
}

std::vector<double> GridSpec::node(std::size_t k) const {
  const std::size_t n = box.size();
  const auto p = static_cast<std::size_t>(points_per_axis);
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    const auto r = box[i];
    const std::size_t idx = k % p;
    k /= p;
    x[i] = points_per_axis == 1 ? 0.5 * (r.lo + r.hi) : r.lo + (r.hi - r.lo) * static_cast<double>(idx) / (p - 1);
  }
  return x;
}

double sup_distance(const MetricField& a, const MetricField& b, const GridSpec& grid, unsigned threads) {
  if (a.dim() != b.dim() || a.dim() != grid.box.size()) throw RescalingError("sup_distance: dimension mismatch");
  if (grid.points_per_axis < 1) throw std::invalid_argument("grid needs at least one point per axis");
  const std::size_t total = grid.size();
  const std::size_t chunks = 64;
  std::vector<double> chunk_max(chunks, 0.0);
  parallel_chunks(total, chunks, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    double m = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto x = grid.node(k);
      const double d = (a.at(x) - b.at(x)).cwiseAbs().maxCoeff();
      if (!std::isfinite(d)) throw RescalingError("non-finite metric component on the sampling grid");
      m = std::max(m, d);
    }
    chunk_max[c] = m;
  });
  return *std::max_element(chunk_max.begin(), chunk_max.end());
}

double sup_distance(const Metric& a, const Metric& b, const GridSpec& grid, unsigned threads) {
  if (!(a.chart() == b.chart())) throw RescalingError("sup_distance: metrics live on different charts");
  return sup_distance(CompiledMetric(a), CompiledMetric(b), grid, threads);
}

// Plans -------------------------------------------------------------------------

std::string to_string(RescalingKind kind) { return kind == RescalingKind::TypeIII ? "type-III" : "type-II"; }

std::vector<CoordinateRange> RescalingPlan::compact_set() const { return box_for(kind, limit_chart.dim(), j); }

Bindings RescalingPlan::parameters(std::size_t i) const {
  Bindings b{{"ti", times.at(i)}, {"c", scales.at(i)}};
  for (const auto& e : map)
    for (const auto& s : free_symbols(e))
      if (s.size() > 2 && s.ends_with("_i") && !b.count(s)) b[s] = 0.0;
  if (i < basepoints.size())
    for (const auto& [k, v] : basepoints[i]) b[basepoint_symbol(k)] = v;
  return b;
}

void RescalingPlan::check() const {
  const std::size_t n = limit_chart.dim();
  if (map.size() != n) throw RescalingError("rescaling plan map has the wrong length");
  if (times.size() != scales.size()) throw RescalingError("rescaling plan needs one scale per time");
  std::vector<Expr> explicit_map = map;
  if (implicit_index) explicit_map[*implicit_index] = Expr::symbol(limit_chart.coordinate(*implicit_index));
  std::vector<std::vector<Expr>> jac(n, std::vector<Expr>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t m = 0; m < n; ++m) jac[a][m] = differentiate(explicit_map[a], limit_chart.coordinate(m));
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  const Expr det = determinant(jac, cols);
  GridSpec corners{compact_set(), 3};
  for (std::size_t i = 0; i < times.size(); ++i) {
    Bindings b = parameters(i);
    b[limit_chart.coordinate(0)] = basepoint_u;
    for (std::size_t k = 1; k < n; ++k) b[limit_chart.coordinate(k)] = 0.0;
    const double sigma = eval(map[0], b);
    if (std::abs(sigma - times[i]) > 1e-12 * std::abs(times[i]))
      throw RescalingError("time map does not send the basepoint to t_i");
    for (std::size_t k = 0; k < corners.size(); ++k) {
      const auto x = corners.node(k);
      for (std::size_t a = 0; a < n; ++a) b[limit_chart.coordinate(a)] = x[a];
      if (eval(det, b) == 0) throw RescalingError("comparison map has a vanishing Jacobian on K_j");
    }
  }
}

RescalingPlan kasner_plan(const KasnerParams& p, std::vector<double> times, int j) {
  kasner(p);  // validates the exponents
  check_times(times);
  RescalingPlan plan;
  plan.kind = RescalingKind::TypeIII;
  std::vector<std::string> coords{"u"};
  plan.map.push_back(kTi * Expr::symbol("u"));
  for (std::size_t k = 0; k < p.exponents.size(); ++k) {
    const std::string y = "y" + std::to_string(k + 1);
    coords.push_back(y);
    plan.map.push_back(pow(kTi, Expr(Number(Rational(1 - p.exponents[k])))) * Expr::symbol(y) +
                       Expr::symbol(basepoint_symbol("x" + std::to_string(k + 1))));
  }
  plan.limit_chart = Chart(coords);
  plan.scale = pow(kTi, Expr(-2));
  for (double t : times) plan.scales.push_back(1.0 / (t * t));
  plan.times = std::move(times);
  plan.basepoint_u = 1.0;
  plan.j = j;
  plan.check();
  return plan;
}

RescalingPlan t2_plan(const T2ModelParams& params, std::vector<double> times, int j) {
  validate(params);
  check_times(times);
  RescalingPlan plan;
  plan.kind = RescalingKind::TypeIII;
  plan.limit_chart = Chart({"u", "thetahat", "xhat", "yhat"});
  const Expr quarter = pow(kTi, Expr::rational(1, 4));
  plan.map = {kTi * Expr::symbol("u"), Expr(0), kTi * Expr::symbol("xhat") + Expr::symbol("x_i"),
              pow(kTi, Expr::rational(1, 2)) * Expr::symbol("yhat") + Expr::symbol("y_i")};
  if (free_symbols(params.L).empty()) {
    plan.map[1] = quarter * Expr::symbol("thetahat") * pow(params.L, Expr(-1));
  } else {
    plan.implicit_index = 1;
    plan.implicit_density = params.L;
    plan.implicit_exponent = Expr::rational(1, 4);
  }
  plan.scale = pow(kTi, Expr(-2));
  for (double t : times) plan.scales.push_back(1.0 / (t * t));
  plan.times = std::move(times);
  plan.basepoint_u = 1.0;
  plan.j = j;
  plan.check();
  return plan;
}

RescalingPlan type_ii_plan(const Metric& g, const std::vector<Bindings>& points, int j) {
  if (points.empty()) throw std::invalid_argument("type-II plan needs at least one basepoint");
  const CurvatureNorm norm(g);
  RescalingPlan plan;
  plan.kind = RescalingKind::TypeII;
  const std::string& time = g.chart().coordinate(0);
  std::vector<std::string> coords{"u"};
  const Expr inv_root_c = pow(kC, Expr::rational(-1, 2));
  plan.map.push_back(inv_root_c * Expr::symbol("u") + kTi);
  for (std::size_t k = 1; k < g.dim(); ++k) {
    const std::string y = "y" + std::to_string(k);
    coords.push_back(y);
    plan.map.push_back(Expr::symbol(basepoint_symbol(g.chart().coordinate(k))) + inv_root_c * Expr::symbol(y));
  }
  plan.limit_chart = Chart(coords);
  plan.scale = kC;
  plan.basepoint_u = 0.0;
  plan.j = j;
  for (const auto& p : points) {
    const double c = norm(p);
    if (!(c > 1e-12)) throw RescalingError("type-II rescaling undefined: curvature vanishes at a basepoint");
    plan.times.push_back(g.complete(p).at(time));
    plan.scales.push_back(c);
    Bindings base;
    for (std::size_t k = 1; k < g.dim(); ++k) base[g.chart().coordinate(k)] = g.complete(p).at(g.chart().coordinate(k));
    plan.basepoints.push_back(std::move(base));
  }
  plan.check();

  const Metric rescaled = rescaled_metric(g, plan);
  const CurvatureNorm rescaled_norm(rescaled);
  for (std::size_t i = 0; i < plan.times.size(); ++i) {
    Bindings at = plan.parameters(i);
    for (const auto& c : plan.limit_chart.coordinates()) at[c] = 0.0;
    const double v = rescaled_norm(at);
    if (std::abs(v - 1.0) > 1e-9)
      throw RescalingError("type-II normalisation failed: rescaled |Rm| at the basepoint is " + std::to_string(v));
  }
  return plan;
}

Metric rescaled_metric(const Metric& g, const RescalingPlan& plan) {
  if (plan.implicit_index) throw RescalingError("rescaled_metric: the plan has an implicit coordinate map");
  return pullback(g, plan.limit_chart, plan.map, plan.scale, plan.parameters(0));
}

std::shared_ptr<MetricField> rescaled_field(const Metric& g, const RescalingPlan& plan, std::size_t i,
                                           const GridSpec* prime_for) {
  const Bindings params = plan.parameters(i);
  if (!plan.implicit_index) return std::make_shared<CompiledMetric>(rescaled_metric(g, plan), params);

  const std::size_t n = g.dim();
  auto base = std::make_shared<CompiledMetric>(g);
  std::vector<AxisMap> axes;
  for (std::size_t a = 0; a < n; ++a) {
    if (a == *plan.implicit_index) {
      const double factor = std::pow(plan.times[i], eval(plan.implicit_exponent, {}));
      auto axis = std::make_shared<ImplicitAxis>(plan.implicit_density, g.chart().coordinate(a), factor);
      if (prime_for) axis->prime(prime_for->axis(a));
      axes.emplace_back([axis](double v) { return (*axis)(v); });
      continue;
    }
    const std::string& var = plan.limit_chart.coordinate(a);
    for (const auto& s : free_symbols(plan.map[a]))
      if (s != var && plan.limit_chart.index_of(s))
        throw RescalingError("numeric pullback needs each old coordinate to depend on one new coordinate");
    Replacements bound;
    for (const auto& [k, v] : params) bound.emplace(k, Expr(v));
    const Expr value = simplify(substitute(plan.map[a], bound));
    const Expr derivative = differentiate(value, var);
    auto code = std::make_shared<std::pair<CompiledExpr, CompiledExpr>>(CompiledExpr(value, {var}),
                                                                        CompiledExpr(derivative, {var}));
    axes.emplace_back([code](double v) {
      const std::span<const double> x(&v, 1);
      return std::pair<double, double>{code->first(x), code->second(x)};
    });
  }
  return std::make_shared<AxisPullback>(base, std::move(axes), plan.scales[i]);
}

// Convergence ---------------------------------------------------------------------

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("line fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("line fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  if (n > 2) {
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double half = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    fit.slope_low = fit.slope - half;
    fit.slope_high = fit.slope + half;
  } else {
    fit.slope_low = -std::numeric_limits<double>::infinity();
    fit.slope_high = std::numeric_limits<double>::infinity();
  }
  return fit;
}

ConvergenceReport convergence_study(const Metric& g, const Metric& limit, const RescalingPlan& plan,
                                    int points_per_axis, unsigned threads) {
  const auto& times = plan.times;
  if (times.size() < 4) throw std::invalid_argument("convergence study needs at least 4 basepoint times");
  check_times(times);
  if (std::log10(times.back() / times.front()) < 4 - 1e-9)
    throw std::invalid_argument("convergence study needs basepoint times spanning at least 4 decades");
  if (points_per_axis < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  if (!(limit.chart() == plan.limit_chart)) throw RescalingError("limit metric is not on the plan's limit chart");

  ConvergenceReport report;
  report.grid = GridSpec{plan.compact_set(), points_per_axis};
  report.symbolic_pullback = !plan.implicit_index;
  const CompiledMetric limit_field(limit);
  std::optional<Metric> symbolic;
  if (report.symbolic_pullback) symbolic = rescaled_metric(g, plan);
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::shared_ptr<MetricField> field;
    if (symbolic) field = std::make_shared<CompiledMetric>(*symbolic, plan.parameters(i));
    else field = rescaled_field(g, plan, i, &report.grid);
    report.points.push_back({times[i], plan.j, sup_distance(*field, limit_field, report.grid, threads)});
  }
  const bool positive =
      std::all_of(report.points.begin(), report.points.end(), [](const auto& p) { return p.sup_distance > 0; });
  if (positive) {
    std::vector<double> x, y;
    for (const auto& p : report.points) {
      x.push_back(std::log(p.ti));
      y.push_back(std::log(p.sup_distance));
    }
    report.fit = fit_line(x, y);
  }
  return report;
}

std::string to_csv(const ConvergenceReport& report) {
  std::string out = "t_i,j,sup_distance\n";
  char buf[96];
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g\n", p.ti, p.j, p.sup_distance);
    out += buf;
  }
  return out;
}

double proper_time_estimate(const T2ModelParams& params, double R0, double R) {
  validate(params);
  if (!(R0 > 0)) throw std::invalid_argument("proper time needs R0 > 0");
  if (R < R0) throw std::invalid_argument("proper time needs R >= R0");
  if (R == R0) return 0.0;
  const double k = std::abs(eval(params.K, {}));
  const double cu = eval(params.CU, {});
  auto integrand = [&](double r) { return std::exp(std::log(r / k) - cu); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, R0, R, 15, 1e-10);
}

}  // namespace elim
