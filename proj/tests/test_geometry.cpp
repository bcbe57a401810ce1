#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "einstein_limits/geometry.hpp"
#include "fd_oracle.hpp"

using namespace elim;

namespace {

Expr P(const char* text) { return parse(text); }

Metric minkowski4() {
  return Metric::diagonal(Chart({"t", "x", "y", "z"}), {Expr(-1), Expr(1), Expr(1), Expr(1)});
}

// Kasner with lapse 1/n, built by hand so these tests do not depend on the catalog.
Metric kasner3(Expr p1, Expr p2, Expr p3) {
  const Expr t = Expr::symbol("t");
  return Metric::diagonal(Chart({"t", "x", "y", "z"}), {Expr::rational(-1, 9), pow(t, Expr(2) * p1),
                                                        pow(t, Expr(2) * p2), pow(t, Expr(2) * p3)});
}

Metric kasner_main() { return kasner3(Expr::rational(2, 3), Expr::rational(2, 3), Expr::rational(-1, 3)); }

// A non-diagonal, inhomogeneous Lorentzian metric with a twist-like cross term.
Metric twisted() {
  Chart chart({"t", "th", "x", "y"});
  const Expr gtt = P("-exp(t/3)/4");
  const Expr gthth = P("t^(3/2)*(1 + sin(th)^2/10) + cos(th)^2*t + 4*t^(3/2)");
  const Expr gthx = P("t*cos(th)");
  const Expr gthy = P("2*t^(5/4)");
  const Expr gxx = P("t");
  const Expr gyy = P("t");
  std::vector<Expr> c(16, Expr(0));
  c[0] = gtt;
  c[5] = gthth;
  c[6] = c[9] = gthx;
  c[7] = c[13] = gthy;
  c[10] = gxx;
  c[15] = gyy;
  return Metric(chart, c);
}

testing::MetricFn numeric(const Metric& g) {
  return [g](const testing::Point& x) {
    Bindings b;
    for (std::size_t i = 0; i < x.size(); ++i) b[g.chart().coordinate(i)] = x[i];
    return g.at(b);
  };
}

Bindings bind(const Metric& g, const testing::Point& x) {
  Bindings b;
  for (std::size_t i = 0; i < x.size(); ++i) b[g.chart().coordinate(i)] = x[i];
  return b;
}

bool close(double a, double b, double rel, double floor) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace

TEST_CASE("inverse metric") {
  const auto minv = inverse_metric(minkowski4());
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) CHECK(minv(a, b) == minkowski4()(a, b));

  const Metric k = kasner_main();
  const auto kinv = inverse_metric(k);
  CHECK(kinv(0, 0) == Expr(-9));
  CHECK(kinv(1, 1) == simplify(P("t^(-4/3)")));
  CHECK(kinv(3, 3) == simplify(P("t^(2/3)")));

  // g · g⁻¹ = I symbolically for the non-diagonal metric
  const Metric g = twisted();
  const auto inv = inverse_metric(g);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      std::vector<Expr> terms;
      for (std::size_t c = 0; c < 4; ++c) terms.push_back(g(a, c) * inv(c, b));
      const auto check = check_zero(sum(terms) - Expr(a == b ? 1 : 0), sample_points(g, 20), VerificationMode::Auto);
      CHECK(check.passed);
    }

  CHECK_THROWS_AS(inverse_metric(Metric::diagonal(Chart({"t", "x", "y", "z"}), {Expr(-1), Expr(0), Expr(1), Expr(1)})),
                  SingularMetricError);
}

TEST_CASE("metric construction rejects asymmetric components") {
  std::vector<Expr> c{Expr(-1), Expr::symbol("t"), Expr(0), Expr(1)};
  CHECK_THROWS_AS(Metric(Chart({"t", "x"}), c), GeometryError);
  CHECK_THROWS_AS(Chart({"t", "t"}), GeometryError);
}

TEST_CASE("christoffel symbols") {
  CHECK(christoffel(minkowski4()).is_zero());

  const Expr p1 = Expr::symbol("p1");
  const Expr p2 = Expr::symbol("p2");
  const Expr p3 = Expr::symbol("p3");
  const auto gam = christoffel(kasner3(p1, p2, p3));
  CHECK(gam(1, 0, 1) == simplify(p1 / Expr::symbol("t")));
  CHECK(gam(2, 2, 0) == simplify(p2 / Expr::symbol("t")));
  CHECK(gam(3, 0, 3) == simplify(p3 / Expr::symbol("t")));

  const auto gk = christoffel(kasner_main());
  CHECK(eval(gk(0, 1, 1), {{"t", 1.0}}) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("riemann tensor") {
  CHECK(riemann(minkowski4()).is_zero());
  CHECK(riemann(kasner3(Expr(1), Expr(0), Expr(0))).is_zero());

  const auto curv = compute_curvature(kasner_main());
  CHECK_FALSE(curv.riemann.is_zero());
  CHECK(curv.ricci.is_zero());
  CHECK(curv.scalar.is_zero());
  CHECK(curv.einstein.is_zero());

  // first Bianchi identity R^a_{[bcd]} = 0
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 4; ++d)
          CHECK(simplify(curv.riemann(a, b, c, d) + curv.riemann(a, c, d, b) + curv.riemann(a, d, b, c)).is_zero());

  // off the Kasner sphere the Ricci tensor is nonzero
  const auto bad = ricci(kasner3(P("9/10"), P("1/10"), Expr(0)));
  CHECK_FALSE(bad.is_zero());
}

TEST_CASE("lowered riemann symmetries") {
  for (const Metric& g : {kasner_main(), twisted()}) {
    const auto curv = compute_curvature(g);
    const auto& r = curv.riemann_lowered;
    const auto samples = sample_points(g, 20);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t c = 0; c < 4; ++c)
          for (std::size_t d = 0; d < 4; ++d) {
            CHECK(check_zero(r(a, b, c, d) + r(b, a, c, d), samples, VerificationMode::Auto).passed);
            CHECK(check_zero(r(a, b, c, d) + r(a, b, d, c), samples, VerificationMode::Auto).passed);
            CHECK(check_zero(r(a, b, c, d) - r(c, d, a, b), samples, VerificationMode::Auto).passed);
          }
  }
}

TEST_CASE("contracted Bianchi identity and trace of G") {
  for (const Metric& g : {kasner_main(), twisted()}) {
    const auto curv = compute_curvature(g);
    const auto samples = sample_points(g, 20);
    for (const auto& component : einstein_divergence(g, curv)) {
      const auto r = check_zero(component, samples, VerificationMode::Auto, 1e-8);
      INFO("path = ", to_string(r.path), " residual = ", r.residual);
      CHECK(r.passed);
    }
    CHECK(check_zero(trace(curv.einstein, curv.inverse) + curv.scalar, samples, VerificationMode::Auto).passed);
  }
}

TEST_CASE("symbolic curvature agrees with finite differences") {
  std::mt19937 rng(5);
  for (const Metric& g : {kasner_main(), twisted()}) {
    const auto curv = compute_curvature(g);
    testing::FdCurvature fd(numeric(g));
    std::uniform_real_distribution<double> t(0.8, 1.8);
    std::uniform_real_distribution<double> s(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      const testing::Point x{t(rng), s(rng), s(rng), s(rng)};
      const Bindings b = bind(g, x);
      const auto gam = fd.christoffel(x);
      const auto rie = fd.riemann(x);
      const Eigen::MatrixXd ein = fd.einstein(x);
      double gam_scale = 0, rie_scale = 0;
      for (double v : gam) gam_scale = std::max(gam_scale, std::abs(v));
      for (double v : rie) rie_scale = std::max(rie_scale, std::abs(v));
      const double ein_scale = std::max(ein.cwiseAbs().maxCoeff(), rie_scale);
      for (std::size_t i = 0; i < gam.size(); ++i)
        CHECK(close(eval(curv.christoffel.components()[i], b), gam[i], 1e-6, gam_scale));
      for (std::size_t i = 0; i < rie.size(); ++i)
        CHECK(close(eval(curv.riemann.components()[i], b), rie[i], 1e-6, rie_scale));
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c) CHECK(close(eval(curv.einstein(a, c), b), ein(a, c), 1e-6, ein_scale));
    }
  }
}

TEST_CASE("orthonormal frames") {
  const Frame mf = coordinate_frame(minkowski4());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t a = 0; a < 4; ++a) CHECK(mf.vectors[i][a] == Expr(i == a ? 1 : 0));

  const Metric k = kasner_main();
  const Frame kf = coordinate_frame(k);
  CHECK(kf.vectors[0][0] == Expr(3));
  CHECK(kf.vectors[1][1] == simplify(P("t^(-2/3)")));
  CHECK(kf.vectors[3][3] == simplify(P("t^(1/3)")));

  const Metric g = twisted();
  const Frame gf = coordinate_frame(g);
  CHECK(frame_orthonormality_error(gf, g, sample_points(g, 10)) <= 1e-9);
  // the θ leg is orthogonal to the later coordinate vectors
  const auto samples = sample_points(g, 5);
  for (const auto& p : samples) {
    const Eigen::MatrixXd m = g.at(p);
    Eigen::VectorXd e1(4);
    for (std::size_t a = 0; a < 4; ++a) e1(a) = eval(gf.vectors[1][a], g.complete(p));
    CHECK(std::abs((m * e1)(2)) <= 1e-12);
    CHECK(std::abs((m * e1)(3)) <= 1e-12);
  }

  const Metric spacelike_t = Metric::diagonal(Chart({"t", "x"}), {Expr(1), Expr(-1)});
  CHECK_THROWS_AS(coordinate_frame(spacelike_t), FrameError);
}

TEST_CASE("curvature norm") {
  CHECK(curvature_norm(minkowski4(), {{"t", 1.0}, {"x", 0.0}, {"y", 0.0}, {"z", 0.0}}) == 0.0);

  const Metric k = kasner_main();
  const CurvatureNorm norm(k);
  const Bindings at1{{"t", 1.0}, {"x", 0.0}, {"y", 0.0}, {"z", 0.0}};
  std::vector<double> scaled;
  for (double t : {1.0, 10.0, 100.0}) {
    Bindings b = at1;
    b["t"] = t;
    scaled.push_back(t * t * norm(b));
  }
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  CHECK((hi - lo) / hi <= 1e-9);

  // oracle: frame components of the finite-difference Riemann tensor in the diagonal frame
  testing::FdCurvature fd(numeric(k));
  const auto rie = fd.riemann({1.0, 0.0, 0.0, 0.0});
  const Eigen::MatrixXd gm = k.at(at1);
  double s = 0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 4; ++d) {
          // lower with the diagonal metric, then scale by 1/sqrt|g| per index
          double v = gm(a, a) * rie[((a * 4 + b) * 4 + c) * 4 + d];
          v /= std::sqrt(std::abs(gm(a, a) * gm(b, b) * gm(c, c) * gm(d, d)));
          s += v * v;
        }
  CHECK(norm(at1) == doctest::Approx(std::sqrt(s)).epsilon(1e-6));

  // |Rm| of c·g is |Rm| of g over c
  std::mt19937 rng(3);
  for (const Metric& g : {k, twisted()}) {
    const CurvatureNorm base(g);
    for (const auto& c : {Expr::rational(1, 4), Expr(4)}) {
      const CurvatureNorm other(g.scaled(c));
      for (const auto& p : sample_points(g, 5, rng())) {
        const double expected = base(p) / eval(c, {});
        CHECK(std::abs(other(p) - expected) <= 1e-12 * expected);
      }
    }
  }
}

TEST_CASE("signature check and zero checks") {
  const Metric g = twisted();
  CHECK_NOTHROW(check_signature(g, sample_points(g, 10)));
  const Metric riem = Metric::diagonal(Chart({"a", "b"}), {Expr(1), Expr(-1)}, {}, Signature::Riemannian);
  CHECK_THROWS_AS(check_signature(riem, sample_points(riem, 1)), GeometryError);

  const auto samples = sample_points(g, 20);
  const Expr z = P("sin(th)^2 + cos(th)^2 - 1");
  CHECK(check_zero(z, samples, VerificationMode::Symbolic).path == CheckPath::SymbolicZero);
  const auto numeric_only = check_zero(z, samples, VerificationMode::Numeric);
  CHECK(numeric_only.passed);
  CHECK(numeric_only.path == CheckPath::NumericBounded);
  CHECK_FALSE(check_zero(P("t - 1"), samples, VerificationMode::Auto).passed);
  CHECK(parse_mode("auto") == VerificationMode::Auto);
  CHECK_THROWS(parse_mode("fast"));
}
