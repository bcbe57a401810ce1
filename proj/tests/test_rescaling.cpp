#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "einstein_limits/rescaling.hpp"

using namespace elim;

namespace {

Expr P(const char* text) { return parse(text); }
Expr S(const char* name) { return Expr::symbol(name); }

T2ModelParams with_profiles(const char* L, const char* G) {
  T2ModelParams p;
  p.L = P(L);
  p.G = P(G);
  return p;
}

T2ModelParams non_default() {
  T2ModelParams p;
  p.K = Expr(2);
  p.CU = Expr(0.3);
  p.Cinf = Expr(1);
  p.L = P("1 + sin(theta)^2/10");
  p.G = P("cos(theta)");
  return p;
}

const std::vector<double> kTimes{1e2, 1e4, 1e6, 1e8};

}  // namespace

TEST_CASE("pullback basics") {
  const Metric g = t2_model(with_profiles("1", "cos(theta)"));
  const Metric same = pullback(g, g.chart(), {S("t"), S("theta"), S("x"), S("y")});
  CHECK(same.components() == g.components());

  // scale commutes with pullback exactly
  const std::vector<Expr> map{P("3*t"), P("theta/2"), P("x + y"), P("y")};
  const Metric a = pullback(g, g.chart(), map, S("c"));
  const Metric b = pullback(g, g.chart(), map);
  for (std::size_t i = 0; i < 16; ++i) CHECK(a.components()[i] == simplify(S("c") * b.components()[i]));

  CHECK_THROWS_AS(pullback(g, g.chart(), {S("t"), S("x"), S("x"), S("y")}), RescalingError);
  CHECK_THROWS_AS(pullback(g, g.chart(), {S("t")}), RescalingError);
}

TEST_CASE("pullback is functorial") {
  const Metric g = t2_model(with_profiles("1", "cos(theta)"));
  const Chart& chart = g.chart();
  // affine maps: exact
  const std::vector<Expr> m1{P("2*t + 1"), P("theta + x"), P("x/3"), P("y - t")};
  const std::vector<Expr> m2{P("t/5"), P("theta"), P("2*x - y"), P("y + 1")};
  std::vector<Expr> composed;
  for (const auto& e : m1)
    composed.push_back(
        simplify(substitute(e, {{"t", m2[0]}, {"theta", m2[1]}, {"x", m2[2]}, {"y", m2[3]}})));
  const Metric direct = pullback(g, chart, composed);
  const Metric stepwise = pullback(pullback(g, chart, m1), chart, m2);
  for (std::size_t i = 0; i < 16; ++i) CHECK(simplify(direct.components()[i] - stepwise.components()[i]).is_zero());

  // nonlinear maps: numerically
  const std::vector<Expr> n1{P("t^2"), P("theta + sin(x)/10"), P("x"), P("y")};
  const std::vector<Expr> n2{P("t + 1"), P("theta"), P("x^3/4 + x"), P("y")};
  std::vector<Expr> ncomp;
  for (const auto& e : n1)
    ncomp.push_back(substitute(e, {{"t", n2[0]}, {"theta", n2[1]}, {"x", n2[2]}, {"y", n2[3]}}));
  const Metric nd = pullback(g, chart, ncomp);
  const Metric ns = pullback(pullback(g, chart, n1), chart, n2);
  for (const auto& p : sample_points(nd, 10)) {
    const Eigen::MatrixXd x = nd.at(p);
    CHECK((x - ns.at(p)).cwiseAbs().maxCoeff() <= 1e-10 * x.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("kasner: the type-III pullback is Kasner again") {
  for (const char* text : {"2/3,2/3,-1/3", "-2/7,3/7,6/7", "1,0,0"}) {
    const KasnerParams p = parse_kasner_exponents(text);
    const RescalingPlan plan = kasner_plan(p, {10, 100, 1000, 1e4});
    const Metric pulled = rescaled_metric(kasner(p), plan);
    const Metric expected =
        pullback(kasner(p), plan.limit_chart, {S("u"), S("y1"), S("y2"), S("y3")});  // renaming only
    CHECK(pulled.components() == expected.components());
    for (const auto& c : pulled.components()) CHECK_FALSE(depends_on(c, "ti"));
  }
}

TEST_CASE("t2 model pullback at finite t_i matches the hat-coordinate form") {
  T2ModelParams p = with_profiles("2", "cos(theta)");
  const RescalingPlan plan = t2_plan(p, kTimes);
  const Metric pulled = rescaled_metric(t2_model(p), plan);
  // hat-coordinate form written out by hand, θ = t_i^{1/4}θ̂/2
  const Expr em = P("exp(-2*CU)");
  const Expr ep = P("exp(2*CU)");
  const Expr gcoef = P("cos(ti^(1/4)*thetahat/2)/2 * ti^(-3/4)");
  const Expr twist = P("4/(K*5^(1/2))*Cinf^(1/2)*u^(1/4)");
  const Expr gtt = P("-1/4*K^(-2)") * em;
  const Expr gthth = P("4/5*K^(-2)*Cinf*u^(3/2)") * em + ep * pow(gcoef, Expr(2)) + em * S("u") * pow(twist, Expr(2));
  CHECK(simplify(pulled(0, 0) - gtt).is_zero());
  CHECK(simplify(pulled(1, 1) - gthth).is_zero());
  CHECK(simplify(pulled(1, 2) - ep * gcoef).is_zero());
  CHECK(simplify(pulled(1, 3) - em * S("u") * twist).is_zero());
  CHECK(simplify(pulled(2, 2) - ep).is_zero());
  CHECK(simplify(pulled(3, 3) - em * S("u")).is_zero());
}

TEST_CASE("sup distance") {
  const Metric m = minkowski(3);
  const GridSpec unit{{{0, 1}, {0, 1}, {0, 1}, {0, 1}}, 3};
  CHECK(sup_distance(m, m, unit) == 0.0);
  CHECK(sup_distance(m, m.scaled(Expr(2)), unit) == 1.0);
  CHECK_THROWS_AS(sup_distance(m, t2_limit_u(T2ModelParams{}), unit), RescalingError);

  // pseudometric on a fixed grid
  const Chart c({"t", "x"});
  const Metric a = Metric::diagonal(c, {P("-1 - t^2"), P("1 + x^2")});
  const Metric b = Metric::diagonal(c, {P("-2"), P("cos(x) + 1")});
  const Metric d = Metric::diagonal(c, {P("-1"), P("exp(x)")});
  const GridSpec grid{{{0.5, 2}, {-1, 1}}, 7};
  CHECK(sup_distance(a, b, grid) == sup_distance(b, a, grid));
  CHECK(sup_distance(a, d, grid) <= sup_distance(a, b, grid) + sup_distance(b, d, grid));

  // regression: rescaled model at t_i = 1e8 on K_2 against the limit
  const T2ModelParams p = with_profiles("1", "cos(theta)");
  const RescalingPlan plan = t2_plan(p, {1e8});
  const auto field = rescaled_field(t2_model(p), plan, 0);
  const double dist = sup_distance(*field, CompiledMetric(t2_limit_u(p)), GridSpec{plan.compact_set(), 9});
  CHECK(dist <= 1e-4);
  CHECK(dist == doctest::Approx(1e-6).epsilon(1e-9));  // e^{2C_U}·|cos|·t_i^{−3/4}, cos(0) = 1 on the grid
}

TEST_CASE("convergence study: default constants") {
  const T2ModelParams twisted = with_profiles("1", "cos(theta)");
  const auto report = convergence_study(t2_model(twisted), t2_limit_u(twisted), t2_plan(twisted, kTimes));
  REQUIRE(report.fit.has_value());
  CHECK(report.symbolic_pullback);
  CHECK(std::abs(report.fit->slope + 0.75) <= 0.05);
  CHECK(report.fit->slope_low <= report.fit->slope);
  CHECK(report.grid.size() == 6561);

  const T2ModelParams polarized = with_profiles("1", "0");
  const auto zero = convergence_study(t2_model(polarized), t2_limit_u(polarized), t2_plan(polarized, kTimes));
  CHECK_FALSE(zero.fit.has_value());
  for (const auto& pt : zero.points) CHECK(pt.sup_distance <= 1e-13);

  const KasnerParams k = parse_kasner_exponents("2/3,2/3,-1/3");
  const RescalingPlan kp = kasner_plan(k, kTimes);
  const Metric limit = pullback(kasner(k), kp.limit_chart, {S("u"), S("y1"), S("y2"), S("y3")});
  for (const auto& pt : convergence_study(kasner(k), limit, kp, 5).points) CHECK(pt.sup_distance == 0.0);

  CHECK_THROWS_AS(convergence_study(t2_model(twisted), t2_limit_u(twisted), t2_plan(twisted, {1e2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(t2_model(twisted), t2_limit_u(twisted), t2_plan(twisted, {1e2, 1e3, 1e4, 1e5})),
                  std::invalid_argument);

  const std::string csv = to_csv(report);
  CHECK(csv.rfind("t_i,j,sup_distance\n100,2,", 0) == 0);
}

TEST_CASE("implicit theta map") {
  const Expr density = P("1 + sin(theta)^2/10");
  ImplicitAxis axis(density, "theta", 10.0);
  // closed form of the primitive: 1.05θ − sin(2θ)/40
  for (double th : {-3.0, 0.5, 7.0, 40.0}) CHECK(axis.primitive(th) == doctest::Approx(1.05 * th - std::sin(2 * th) / 40).epsilon(1e-12));
  for (double s : {-2.0, 0.0, 0.3, 2.0}) {
    const auto [th, d] = axis(s);
    CHECK(std::abs(1.05 * th - std::sin(2 * th) / 40 - 10 * s) <= 1e-11 * std::max(1.0, std::abs(10 * s)));
    CHECK(d == doctest::Approx(10.0 / eval(density, {{"theta", th}})).epsilon(1e-12));
  }

  // numeric and symbolic pullbacks agree for a constant density
  const T2ModelParams p = with_profiles("2", "cos(theta)");
  RescalingPlan numeric = t2_plan(p, kTimes);
  numeric.implicit_index = 1;
  numeric.implicit_density = Expr(2);
  numeric.implicit_exponent = Expr::rational(1, 4);
  const RescalingPlan symbolic = t2_plan(p, kTimes);
  const GridSpec grid{symbolic.compact_set(), 4};
  for (std::size_t i = 0; i < kTimes.size(); ++i) {
    const auto a = rescaled_field(t2_model(p), numeric, i, &grid);
    const auto b = rescaled_field(t2_model(p), symbolic, i);
    CHECK(sup_distance(*a, *b, grid) <= 1e-9);
  }
}

TEST_CASE("convergence study: non-default constants and profiles") {
  const T2ModelParams p = non_default();
  const auto report = convergence_study(t2_model(p), t2_limit_u(p), t2_plan(p, kTimes), 5);
  CHECK_FALSE(report.symbolic_pullback);
  REQUIRE(report.fit.has_value());
  CHECK(std::abs(report.fit->slope + 0.75) <= 0.05);
}

TEST_CASE("grid sweeps are deterministic across thread counts") {
  const T2ModelParams p = with_profiles("1", "cos(theta)");
  const auto plan = t2_plan(p, kTimes);
  const auto one = convergence_study(t2_model(p), t2_limit_u(p), plan, 6, 1);
  const auto four = convergence_study(t2_model(p), t2_limit_u(p), plan, 6, 4);
  CHECK(to_csv(one) == to_csv(four));
}

TEST_CASE("type-II plans") {
  const Metric k = kasner(parse_kasner_exponents("2/3,2/3,-1/3"));
  const Bindings p{{"t", 10.0}, {"x1", 0.0}, {"x2", 0.0}, {"x3", 0.0}};
  const RescalingPlan plan = type_ii_plan(k, {p});
  CHECK(plan.kind == RescalingKind::TypeII);
  CHECK(plan.scales[0] == doctest::Approx(curvature_norm(k, p)).epsilon(1e-14));
  const CurvatureNorm rescaled(rescaled_metric(k, plan));
  Bindings at = plan.parameters(0);
  for (const auto& c : plan.limit_chart.coordinates()) at[c] = 0.0;
  CHECK(std::abs(rescaled(at) - 1.0) <= 1e-9);

  const RescalingPlan doubled = type_ii_plan(k.scaled(Expr(2)), {p});
  CHECK(doubled.scales[0] == doctest::Approx(plan.scales[0] / 2).epsilon(1e-13));
  CHECK(plan.compact_set()[0].lo == -1.0);

  CHECK_THROWS_AS(type_ii_plan(minkowski(3), {{{"t", 1.0}, {"x1", 0.0}, {"x2", 0.0}, {"x3", 0.0}}}), RescalingError);
}

TEST_CASE("proper time estimate") {
  T2ModelParams p;
  CHECK(proper_time_estimate(p, 1, 1) == 0.0);
  for (double R : {100.0, 1e4}) {
    const double closed = (R * R - 1) / 2;
    CHECK(proper_time_estimate(p, 1, R) == doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK(std::abs(proper_time_estimate(p, 1, 100) / 1e4 - 0.5) <= 0.005);
  T2ModelParams shifted = p;
  shifted.CU = P("log(2)");
  CHECK(proper_time_estimate(shifted, 1, 50) == doctest::Approx(proper_time_estimate(p, 1, 50) / 2).epsilon(1e-12));
  T2ModelParams negative = p;
  negative.K = Expr(-2);
  CHECK(proper_time_estimate(negative, 1, 50) == doctest::Approx(proper_time_estimate(p, 1, 50) / 2).epsilon(1e-12));
  CHECK_THROWS_AS(proper_time_estimate(p, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(proper_time_estimate(p, 0, 1), std::invalid_argument);
}

TEST_CASE("least squares line") {
  const auto fit = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.slope_high - fit.slope_low == doctest::Approx(0.0));
  // oracle: noisy points, interval half-width t_{0.975,2}·se with t = 4.302652729911275
  const auto noisy = fit_line({0, 1, 2, 3}, {0, 1.1, 1.9, 3.2});
  const double sxx = 5.0;
  double sse = 0;
  for (double r : noisy.residuals) sse += r * r;
  const double half = 4.302652729911275 * std::sqrt(sse / 2 / sxx);
  CHECK(noisy.slope_high - noisy.slope == doctest::Approx(half).epsilon(1e-9));
}
