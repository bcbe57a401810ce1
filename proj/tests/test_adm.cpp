#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "einstein_limits/adm.hpp"

using namespace elim;

namespace {

Expr simp(const char* text) { return simplify(parse(text)); }

KasnerParams kasner_family(const Rational& s) {
  const Rational d = 1 + s + s * s;
  return {{-s / d, (1 + s) / d, s * (1 + s) / d}};
}

Bindings at_u(double u) { return {{"u", u}, {"thetahat", 0.3}, {"xhat", -0.2}, {"yhat", 0.7}}; }

}  // namespace

TEST_CASE("kasner slice") {
  const KasnerParams p = parse_kasner_exponents("2/3,2/3,-1/3");
  const AdmSlice s = adm_split(kasner(p));
  CHECK(s.time == "t");
  CHECK(s.dim() == 3);
  CHECK(s.h.signature() == Signature::Riemannian);
  CHECK(s.lapse == Expr::rational(1, 3));
  // K_kk = −3 p_k t^{2p_k − 1}
  CHECK(s.K(0, 0) == simp("-2*t^(1/3)"));
  CHECK(s.K(2, 2) == simp("t^(-5/3)"));
  CHECK(s.K(0, 1).is_zero());
  CHECK(s.mean_curvature == simp("-3/t"));
  // Hubble time
  CHECK(simplify(Expr(-3) / s.mean_curvature) == Expr::symbol("t"));
  for (const auto& c : s.h.chart().coordinates()) CHECK_FALSE(depends_on(s.mean_curvature, c));

  const Bindings t1{{"t", 1.0}};
  CHECK(eval(second_form_norm_squared(s), t1) == doctest::Approx(9.0));
  CHECK(eval(s.mean_curvature * s.mean_curvature, t1) == doctest::Approx(9.0));
  CHECK(scalar_curvature(s.h).is_zero());
  CHECK(hamiltonian_residual(s).is_zero());
}

TEST_CASE("minkowski slice is static") {
  const AdmSlice s = adm_split(minkowski(3));
  CHECK(s.lapse == Expr(1));
  for (const auto& k : s.second_form) CHECK(k.is_zero());
  CHECK(s.mean_curvature.is_zero());
  CHECK(hamiltonian_residual(s).is_zero());
  CHECK(energy_density(s).is_zero());
}

TEST_CASE("split errors") {
  const Chart c({"t", "x"});
  const Metric shifted(c, {Expr(-1), parse("t"), parse("t"), Expr(1)});
  CHECK_THROWS_AS(adm_split(shifted), AdmError);
  const Metric spacelike_t = Metric::diagonal(c, {Expr(1), Expr(1)});
  CHECK_THROWS_AS(adm_split(spacelike_t), AdmError);
  const Metric riemannian = Metric::diagonal(c, {Expr(1), Expr(1)}, {}, Signature::Riemannian);
  CHECK_THROWS_AS(adm_split(riemannian), AdmError);
}

TEST_CASE("hamiltonian constraint on the kasner sphere") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<long> num(-40, 40), den(1, 17);
  for (int k = 0; k < 5; ++k) {
    const Rational s = Rational(num(rng)) / Rational(den(rng));
    const KasnerParams p = kasner_family(s);
    CAPTURE(s);
    CHECK(hamiltonian_residual(adm_split(kasner(p))).is_zero());
  }
}

TEST_CASE("hamiltonian constraint fails off the kasner sphere") {
  const KasnerParams p = parse_kasner_exponents("9/10,1/10,0");
  const Expr r = hamiltonian_residual(adm_split(kasner_unchecked(p)));
  // flat slices, K diagonal: 9((Σp)² − Σp²)/t² = 9·0.18 at t = 1
  CHECK(eval(r, {{"t", 1.0}}) == doctest::Approx(1.62).epsilon(1e-14));
}

TEST_CASE("gauss consistency") {
  CHECK(gauss_mismatch(kasner(parse_kasner_exponents("2/3,2/3,-1/3"))).is_zero());
  CHECK(gauss_mismatch(minkowski(3)).is_zero());
  const Metric g = t2_limit_u(T2ModelParams{});
  const Expr m = gauss_mismatch(g);
  const ZeroCheck z = check_zero(m, sample_points(g, 10), VerificationMode::Auto);
  CHECK(z.passed);
  T2ModelParams q;
  q.L = parse("1 + sin(theta)^2/10");
  q.G = parse("cos(theta)");
  const Metric model = t2_model(q);
  CHECK(check_zero(gauss_mismatch(model), sample_points(model, 10), VerificationMode::Auto).passed);
}

TEST_CASE("energy density of the limit") {
  const AdmSlice s = adm_split(t2_limit_u(T2ModelParams{}));
  const Expr rho = energy_density(s);
  // G(n,n) = G_R̂R̂ / e^{2(η̂−Û)} = 5K²e^{2C_U}/(4u²)
  for (double u : {0.5, 1.0, 2.0, 10.0}) {
    const double v = eval(rho, s.h.complete(at_u(u)));
    CHECK(v > 0);
    CHECK(u * u * v == doctest::Approx(1.25).epsilon(1e-12));
  }
  T2ModelParams q;
  q.K = Expr(2);
  q.CU = parse("0.3");
  q.Cinf = Expr(1);
  const Metric g = t2_limit_u(q);
  const Expr rho2 = energy_density(adm_split(g));
  const double expected = 5.0 * 4.0 * std::exp(0.6) / 4.0;
  for (double u : {1.0, 4.0, 9.0}) CHECK(u * u * eval(rho2, g.complete(at_u(u))) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("backreaction balance") {
  const BackreactionResidual r = lefloch_residual(T2ModelParams{});
  CHECK(r.difference.is_zero());
  CHECK(r.factor == simp("1/Rhat"));
  const Bindings d{{"K", 1.0}, {"CU", 0.0}, {"Cinf", 1.25}};
  auto lhs_at = [&](double R) {
    Bindings b = d;
    b["Rhat"] = R;
    return eval(r.lhs, b);
  };
  CHECK(std::abs(lhs_at(1.0) - 1.25) <= 1e-15);
  CHECK(std::abs(lhs_at(2.0) - 0.625) <= 1e-15);
  for (double R : {0.5, 1.0, 2.0}) CHECK(std::abs(lhs_at(R) * R - 1.25) <= 1e-12);

  T2ModelParams inlined;
  inlined.K = Expr(-3);
  inlined.CU = Expr::rational(3, 10);
  inlined.Cinf = Expr(7);
  inlined.symbolic_constants = false;
  CHECK(lefloch_residual(inlined).difference.is_zero());
}

TEST_CASE("trace of the effective stress-energy") {
  const TraceReport r = gw_trace_check(t2_limit(T2ModelParams{}), VerificationMode::Symbolic);
  CHECK(r.scalar.is_zero());
  CHECK(r.trace.is_zero());
  CHECK(r.trace_zero.passed);
  REQUIRE(r.nonzero.size() == 2);
  CHECK(r.nonzero[0].a == 0);
  CHECK(r.nonzero[0].b == 0);
  CHECK(r.nonzero[1].a == 1);
  CHECK(r.nonzero[1].b == 1);
  CHECK(simplify(r.nonzero[0].value - r.nonzero[1].value).is_zero());
  const Bindings p{{"Rhat", 1.5}, {"thetahat", 0.1}, {"xhat", 0.0}, {"yhat", 0.0}, {"K", 1.0}, {"CU", 0.0}, {"Cinf", 1.25}};
  CHECK(eval(r.nonzero[0].value, p) > 0);

  const TraceReport vac = gw_trace_check(kasner(parse_kasner_exponents("2/3,2/3,-1/3")));
  CHECK(vac.trace.is_zero());
  CHECK(vac.scalar.is_zero());
  CHECK(vac.nonzero.empty());
}

TEST_CASE("trace is nonzero without the twist term") {
  T2Functions f = t2_limit_functions(T2ModelParams{});
  f.H = Expr(0);
  const T2Constants k = constants_of(T2ModelParams{});
  const Metric g = t2_general(t2_limit(T2ModelParams{}).chart(), f, Expr::symbol("Rhat"), k.defaults);
  const TraceReport r = gw_trace_check(g);
  CHECK_FALSE(r.trace_zero.passed);
  const Bindings p = g.complete({{"Rhat", 2.0}, {"thetahat", 0.0}, {"xhat", 0.0}, {"yhat", 0.0}});
  // regression value from the engine
  CHECK(r.trace == simp("exp(2*CU)*K^2/(2*Rhat^4)"));
  CHECK(eval(r.trace, p) == doctest::Approx(1.0 / 32).epsilon(1e-15));
}

TEST_CASE("constraint report") {
  const ConstraintReport k = constraint_report(kasner(parse_kasner_exponents("2/3,2/3,-1/3")), VerificationMode::Symbolic);
  REQUIRE(k.find("hamiltonian"));
  CHECK(k.find("hamiltonian")->zero.passed);
  CHECK(k.find("hamiltonian")->zero.path == CheckPath::SymbolicZero);
  CHECK(k.find("gauss_mismatch")->zero.passed);
  CHECK(k.find("lefloch") == nullptr);

  const T2ModelParams params;
  const ConstraintReport t = constraint_report(t2_limit_u(params), VerificationMode::Auto, 6, &params);
  CHECK(t.find("lefloch")->zero.passed);
  CHECK_FALSE(t.find("hamiltonian")->zero.passed);
  for (double v : t.find("energy_density")->values) CHECK(v > 0);
  CHECK(t.find("energy_density")->values.size() == 6);
}
