#include "einstein_limits/adm.hpp"

#include <algorithm>

namespace elim {

namespace {

Chart spatial_chart(const Chart& c) {
  std::vector<std::string> names;
  std::vector<std::optional<CoordinateRange>> ranges;
  for (std::size_t i = 1; i < c.dim(); ++i) {
    names.push_back(c.coordinate(i));
    ranges.push_back(c.has_range(i) ? std::optional<CoordinateRange>(c.range(i)) : std::nullopt);
  }
  return Chart(std::move(names), std::move(ranges));
}

}  // namespace

AdmSlice adm_split(const Metric& g) {
  if (g.signature() != Signature::Lorentzian) throw AdmError("adm_split needs a Lorentzian metric");
  const std::size_t n = g.dim() - 1;
  const Chart& chart = g.chart();
  for (std::size_t a = 1; a <= n; ++a)
    if (!g(0, a).is_zero())
      throw AdmError("metric has a shift term g[" + chart.coordinate(0) + "," + chart.coordinate(a) +
                     "]; change coordinates to remove dt cross terms first");

  const Expr lapse_sq = simplify(-g(0, 0));
  for (const auto& p : sample_points(g, 8, 5))
    if (!(eval(lapse_sq, p) > 0)) throw AdmError("lapse squared is not positive at a sample point");

  AdmSlice s;
  s.time = chart.coordinate(0);
  std::vector<Expr> h(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) h[a * n + b] = g(a + 1, b + 1);
  s.h = Metric(spatial_chart(chart), h, g.defaults(), Signature::Riemannian);
  s.lapse = simplify(sqrt(lapse_sq));

  const Expr factor = simplify(Expr::rational(-1, 2) / s.lapse);
  s.second_form.resize(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const Expr k = simplify(factor * differentiate(s.h(a, b), s.time));
      s.second_form[a * n + b] = k;
      s.second_form[b * n + a] = k;
    }
  const TensorField inv = inverse_metric(s.h);
  std::vector<Expr> terms;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (!inv(a, b).is_zero() && !s.K(a, b).is_zero()) terms.push_back(inv(a, b) * s.K(b, a));
  s.mean_curvature = simplify(sum(terms));
  return s;
}

Expr second_form_norm_squared(const AdmSlice& s) {
  const std::size_t n = s.dim();
  const TensorField inv = inverse_metric(s.h);
  // K^a_b = h^{ac}K_cb, then |K|² = K^a_b K^b_a
  std::vector<Expr> mixed(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<Expr> terms;
      for (std::size_t c = 0; c < n; ++c)
        if (!inv(a, c).is_zero() && !s.K(c, b).is_zero()) terms.push_back(inv(a, c) * s.K(c, b));
      mixed[a * n + b] = simplify(sum(terms));
    }
  std::vector<Expr> terms;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (!mixed[a * n + b].is_zero() && !mixed[b * n + a].is_zero()) terms.push_back(mixed[a * n + b] * mixed[b * n + a]);
  return simplify(sum(terms));
}

Expr hamiltonian_residual(const AdmSlice& s) {
  const Expr rh = scalar_curvature(s.h);
  return simplify(rh - second_form_norm_squared(s) + s.mean_curvature * s.mean_curvature);
}

Expr energy_density(const AdmSlice& s) { return simplify(Expr::rational(1, 2) * hamiltonian_residual(s)); }

Expr gauss_mismatch(const Metric& g) {
  const AdmSlice s = adm_split(g);
  const TensorField G = einstein_tensor(g);
  return simplify(energy_density(s) - G(0, 0) / (s.lapse * s.lapse));
}

BackreactionResidual lefloch_residual(const T2ModelParams& params) {
  const T2Functions f = t2_limit_functions(params);
  const T2Constants k = constants_of(params);
  const Expr R = Expr::symbol("Rhat");
  const Expr a = simplify(Expr(1) / f.ainv);
  // η̂_R̂ from e^{2η̂} without taking a logarithm
  const Expr eta_r = simplify(differentiate(f.exp_2eta, "Rhat") / (Expr(2) * f.exp_2eta));
  const Expr u_r = differentiate(f.U, "Rhat");
  const Expr u_th = differentiate(f.U, "thetahat");
  BackreactionResidual r;
  r.lhs = simplify(eta_r + k.K * k.K * f.exp_2eta / (Expr(4) * pow(R, Expr(3))) -
                   a * R * (f.ainv * u_r * u_r + a * u_th * u_th));
  r.difference = simplify(r.lhs - Expr::rational(5, 4) / R);
  const TensorField G = einstein_tensor(t2_limit(params));
  r.factor = simplify(G(0, 0) / r.lhs);
  return r;
}

TraceReport gw_trace_check(const Metric& g, VerificationMode mode, std::size_t samples) {
  const Curvature curv = compute_curvature(g);
  const auto points = sample_points(g, samples, 3);
  TraceReport r;
  r.trace = simplify(trace(curv.einstein, curv.inverse));
  r.scalar = curv.scalar;
  r.trace_zero = check_zero(r.trace, points, mode, 1e-10);
  r.scalar_zero = check_zero(r.scalar, points, mode, 1e-10);
  const Frame frame = coordinate_frame(g);
  const std::vector<Expr> comps = frame_components(curv.einstein, frame);
  const std::size_t n = g.dim();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const Expr& v = comps[a * n + b];
      ZeroCheck z = check_zero(v, points, mode, 1e-10);
      if (!z.passed) r.nonzero.push_back({a, b, simplify(v), z});
    }
  return r;
}

const ConstraintEntry* ConstraintReport::find(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

ConstraintReport constraint_report(const Metric& g, VerificationMode mode, std::size_t samples,
                                   const T2ModelParams* t2) {
  ConstraintReport r;
  r.samples = sample_points(g, samples, 7);
  const AdmSlice s = adm_split(g);
  auto add = [&](std::string name, Expr e, const std::vector<Bindings>& points) {
    ConstraintEntry c{std::move(name), e, {}, check_zero(e, points, mode)};
    for (const auto& p : points) c.values.push_back(eval(e, p));
    r.entries.push_back(std::move(c));
  };
  add("hamiltonian", hamiltonian_residual(s), r.samples);
  add("gauss_mismatch", gauss_mismatch(g), r.samples);
  add("energy_density", energy_density(s), r.samples);
  if (t2) {
    const Metric limit = t2_limit(*t2);
    add("lefloch", lefloch_residual(*t2).difference, sample_points(limit, samples, 7));
  }
  return r;
}

}  // namespace elim
