#pragma once

// Independent numeric curvature: metric components as plain callables,
// derivatives by nested 4th-order central differences, inverse by Eigen.
// Shares nothing with the symbolic pipeline except the conventions.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace elim::testing {

using Point = std::vector<double>;
using MetricFn = std::function<Eigen::MatrixXd(const Point&)>;

class FdCurvature {
 public:
  FdCurvature(MetricFn g, double h = 1e-3) : g_(std::move(g)), h_(h) {}

  Eigen::MatrixXd metric(const Point& x) const { return g_(x); }

  /// ∂_d g_{bc} at x, 4th-order stencil.
  std::vector<Eigen::MatrixXd> dmetric(const Point& x) const {
    const std::size_t n = x.size();
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t d = 0; d < n; ++d) out.push_back(stencil([&](const Point& p) { return g_(p); }, x, d));
    return out;
  }

  /// Γ^a_{bc} flattened as a*n*n + b*n + c.
  std::vector<double> christoffel(const Point& x) const {
    const std::size_t n = x.size();
    const Eigen::MatrixXd inv = g_(x).inverse();
    const auto dg = dmetric(x);
    std::vector<double> out(n * n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) {
          double s = 0;
          for (std::size_t d = 0; d < n; ++d) s += inv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
          out[(a * n + b) * n + c] = 0.5 * s;
        }
    return out;
  }

  /// R^a_{bcd} flattened row-major, differentiating the numeric Γ again.
  std::vector<double> riemann(const Point& x) const {
    const std::size_t n = x.size();
    const auto gam = christoffel(x);
    std::vector<std::vector<double>> dgam;
    for (std::size_t c = 0; c < n; ++c) dgam.push_back(stencil_vec([&](const Point& p) { return christoffel(p); }, x, c));
    auto G = [&](std::size_t a, std::size_t b, std::size_t c) { return gam[(a * n + b) * n + c]; };
    auto dG = [&](std::size_t e, std::size_t a, std::size_t b, std::size_t c) { return dgam[e][(a * n + b) * n + c]; };
    std::vector<double> out(n * n * n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t d = 0; d < n; ++d) {
            double s = dG(c, a, d, b) - dG(d, a, c, b);
            for (std::size_t e = 0; e < n; ++e) s += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
            out[((a * n + b) * n + c) * n + d] = s;
          }
    return out;
  }

  /// Ric_{bd} = R^a_{bad}.
  Eigen::MatrixXd ricci(const Point& x) const {
    const std::size_t n = x.size();
    const auto r = riemann(x);
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t a = 0; a < n; ++a) ric(b, d) += r[((a * n + b) * n + a) * n + d];
    return ric;
  }

  double scalar(const Point& x) const { return (g_(x).inverse() * ricci(x)).trace(); }

  /// Einstein tensor G_{ab}.
  Eigen::MatrixXd einstein(const Point& x) const {
    const Eigen::MatrixXd ric = ricci(x);
    const Eigen::MatrixXd g = g_(x);
    return ric - 0.5 * (g.inverse() * ric).trace() * g;
  }

 private:
  template <class F>
  Eigen::MatrixXd stencil(F f, const Point& x, std::size_t d) const {
    auto at = [&](double k) {
      Point p = x;
      p[d] += k * h_;
      return f(p);
    };
    return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h_);
  }

  template <class F>
  std::vector<double> stencil_vec(F f, const Point& x, std::size_t d) const {
    auto at = [&](double k) {
      Point p = x;
      p[d] += k * h_;
      return f(p);
    };
    const auto a = at(2), b = at(1), c = at(-1), e = at(-2);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (-a[i] + 8 * b[i] - 8 * c[i] + e[i]) / (12 * h_);
    return out;
  }

  MetricFn g_;
  double h_;
};

}  // namespace elim::testing
