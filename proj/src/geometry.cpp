#include "einstein_limits/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace elim {
namespace {

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

/// Symbolic determinant by cofactor expansion along the first remaining row,
/// memoised on the (row set, column set) of each minor.
class Determinant {
 public:
  explicit Determinant(const Metric& g) : g_(g) {}

  Expr minor(std::vector<std::size_t> rows, std::vector<std::size_t> cols) {
    if (rows.empty()) return Expr(1);
    std::uint64_t key = 0;
    for (auto r : rows) key |= 1ULL << r;
    for (auto c : cols) key |= 1ULL << (c + 32);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::size_t r0 = rows.front();
    std::vector<std::size_t> rest_rows(rows.begin() + 1, rows.end());
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Expr& entry = g_(r0, cols[k]);
      if (entry.is_zero()) continue;
      std::vector<std::size_t> rest_cols = cols;
      rest_cols.erase(rest_cols.begin() + static_cast<long>(k));
      Expr sub = minor(rest_rows, rest_cols);
      if (sub.is_zero()) continue;
      Expr term = entry * sub;
      terms.push_back(k % 2 ? -term : term);
    }
    Expr out = simplify(sum(terms));
    memo_.emplace(key, out);
    return out;
  }

 private:
  const Metric& g_;
  std::map<std::uint64_t, Expr> memo_;
};

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TensorField compute_inverse(const Metric& g) {
  const std::size_t n = g.dim();
  Determinant det(g);
  const Expr d = det.minor(iota(n), iota(n));
  if (d.is_zero()) throw SingularMetricError("metric is symbolically singular (determinant simplifies to 0)");
  const Expr inv_det = pow(d, Expr(-1));
  std::vector<Expr> out(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      std::vector<std::size_t> rows;
      std::vector<std::size_t> cols;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != a) rows.push_back(i);
        if (i != b) cols.push_back(i);
      }
      Expr cof = det.minor(rows, cols);
      if ((a + b) % 2) cof = -cof;
      out[a * n + b] = out[b * n + a] = simplify(cof * inv_det);
    }
  }
  return TensorField(g.chart(), {Index::Up, Index::Up}, std::move(out), {{0, 1, false}});
}

TensorField compute_christoffel(const Metric& g, const TensorField& inv) {
  const std::size_t n = g.dim();
  const auto& coords = g.chart().coordinates();
  // dg[(d*n + b)*n + c] = ∂_d g_{bc}
  std::vector<Expr> dg(n * n * n);
  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = b; c < n; ++c)
        dg[(d * n + b) * n + c] = dg[(d * n + c) * n + b] = differentiate(g(b, c), coords[d]);
  auto D = [&](std::size_t d, std::size_t b, std::size_t c) -> const Expr& { return dg[(d * n + b) * n + c]; };

  std::vector<Expr> out(n * n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = b; c < n; ++c) {
        std::vector<Expr> terms;
        for (std::size_t d = 0; d < n; ++d) {
          const Expr& ginv = inv(a, d);
          if (ginv.is_zero()) continue;
          Expr bracket = simplify(D(b, d, c) + D(c, d, b) - D(d, b, c));
          if (bracket.is_zero()) continue;
          terms.push_back(ginv * bracket);
        }
        out[(a * n + b) * n + c] = out[(a * n + c) * n + b] = simplify(Expr::rational(1, 2) * sum(terms));
      }
    }
  }
  return TensorField(g.chart(), {Index::Up, Index::Down, Index::Down}, std::move(out), {{1, 2, false}});
}

TensorField compute_riemann(const Metric& g, const TensorField& gamma) {
  const std::size_t n = g.dim();
  const auto& coords = g.chart().coordinates();
  // dgamma[((c*n + a)*n + d)*n + b] = ∂_c Γ^a_{db}
  std::vector<Expr> dgamma(n * n * n * n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t b = d; b < n; ++b)
          dgamma[((c * n + a) * n + d) * n + b] = dgamma[((c * n + a) * n + b) * n + d] =
              differentiate(gamma(a, d, b), coords[c]);
  auto dG = [&](std::size_t c, std::size_t a, std::size_t d, std::size_t b) -> const Expr& {
    return dgamma[((c * n + a) * n + d) * n + b];
  };

  std::vector<Expr> out(n * n * n * n, Expr(0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t d = c + 1; d < n; ++d) {
          std::vector<Expr> terms{dG(c, a, d, b), -dG(d, a, c, b)};
          for (std::size_t e = 0; e < n; ++e) {
            const Expr& g1 = gamma(a, c, e);
            const Expr& g2 = gamma(e, d, b);
            if (!g1.is_zero() && !g2.is_zero()) terms.push_back(g1 * g2);
            const Expr& g3 = gamma(a, d, e);
            const Expr& g4 = gamma(e, c, b);
            if (!g3.is_zero() && !g4.is_zero()) terms.push_back(-(g3 * g4));
          }
          Expr r = simplify(sum(terms));
          out[((a * n + b) * n + c) * n + d] = r;
          out[((a * n + b) * n + d) * n + c] = r.is_zero() ? r : simplify(-r);
        }
      }
    }
  }
  return TensorField(g.chart(), {Index::Up, Index::Down, Index::Down, Index::Down}, std::move(out),
                     {{2, 3, true}});
}

TensorField lower_first(const Metric& g, const TensorField& r) {
  const std::size_t n = g.dim();
  // Only a < b is computed; the (a,b) antisymmetry then holds by construction.
  std::vector<Expr> out(n * n * n * n, Expr(0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          std::vector<Expr> terms;
          for (std::size_t e = 0; e < n; ++e) {
            if (g(a, e).is_zero() || r(e, b, c, d).is_zero()) continue;
            terms.push_back(g(a, e) * r(e, b, c, d));
          }
          const Expr v = simplify(sum(terms));
          const Expr minus_v = v.is_zero() ? v : simplify(-v);
          out[((a * n + b) * n + c) * n + d] = v;
          out[((b * n + a) * n + d) * n + c] = v;
          out[((b * n + a) * n + c) * n + d] = minus_v;
          out[((a * n + b) * n + d) * n + c] = minus_v;
        }
  return TensorField(g.chart(), {Index::Down, Index::Down, Index::Down, Index::Down}, std::move(out),
                     {{0, 1, true}, {2, 3, true}});
}

TensorField contract_ricci(const Metric& g, const TensorField& r) {
  const std::size_t n = g.dim();
  std::vector<Expr> out(n * n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t d = b; d < n; ++d) {
      std::vector<Expr> terms;
      for (std::size_t a = 0; a < n; ++a) terms.push_back(r(a, b, a, d));
      out[b * n + d] = out[d * n + b] = simplify(sum(terms));
    }
  return TensorField(g.chart(), {Index::Down, Index::Down}, std::move(out), {{0, 1, false}});
}

TensorField build_einstein(const Metric& g, const TensorField& ric, const Expr& scalar) {
  const std::size_t n = g.dim();
  std::vector<Expr> out(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      out[a * n + b] = out[b * n + a] = simplify(ric(a, b) - Expr::rational(1, 2) * scalar * g(a, b));
  return TensorField(g.chart(), {Index::Down, Index::Down}, std::move(out), {{0, 1, false}});
}

Expr inner(const Metric& g, const std::vector<Expr>& v, const std::vector<Expr>& w) {
  std::vector<Expr> terms;
  for (std::size_t a = 0; a < g.dim(); ++a)
    for (std::size_t b = 0; b < g.dim(); ++b) {
      if (v[a].is_zero() || w[b].is_zero() || g(a, b).is_zero()) continue;
      terms.push_back(v[a] * w[b] * g(a, b));
    }
  return simplify(sum(terms));
}

double eval_at(const Expr& e, const Bindings& b) { return eval(e, b); }

}  // namespace

// Chart ---------------------------------------------------------------------

Chart::Chart(std::vector<std::string> coordinates, std::vector<std::optional<CoordinateRange>> ranges)
    : coordinates_(std::move(coordinates)), ranges_(std::move(ranges)) {
  if (coordinates_.empty()) throw GeometryError("chart needs at least one coordinate");
  std::set<std::string> seen(coordinates_.begin(), coordinates_.end());
  if (seen.size() != coordinates_.size()) throw GeometryError("chart coordinate names must be unique");
  ranges_.resize(coordinates_.size());
}

std::optional<std::size_t> Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < coordinates_.size(); ++i)
    if (coordinates_[i] == name) return i;
  return std::nullopt;
}

CoordinateRange Chart::range(std::size_t i) const {
  if (has_range(i)) return *ranges_[i];
  return i == 0 ? CoordinateRange{0.5, 2.0} : CoordinateRange{-1.0, 1.0};
}

void Chart::set_range(std::size_t i, CoordinateRange r) {
  if (r.hi < r.lo) throw GeometryError("coordinate range upper bound below lower bound");
  ranges_.resize(coordinates_.size());
  ranges_.at(i) = r;
}

// Metric --------------------------------------------------------------------

Metric::Metric(Chart chart, std::vector<Expr> components, Bindings defaults, Signature signature)
    : chart_(std::move(chart)), defaults_(std::move(defaults)), signature_(signature) {
  const std::size_t n = chart_.dim();
  if (signature_ == Signature::Lorentzian && n < 2) throw GeometryError("Lorentzian metric needs dimension >= 2");
  if (components.size() != n * n) throw GeometryError("metric needs dim*dim components");
  components_.reserve(n * n);
  for (const auto& c : components) components_.push_back(simplify(c));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (components_[a * n + b] != components_[b * n + a])
        throw GeometryError("metric components (" + chart_.coordinate(a) + "," + chart_.coordinate(b) +
                            ") and (" + chart_.coordinate(b) + "," + chart_.coordinate(a) + ") differ");
}

Metric Metric::diagonal(Chart chart, const std::vector<Expr>& diag, Bindings defaults, Signature signature) {
  const std::size_t n = chart.dim();
  if (diag.size() != n) throw GeometryError("diagonal metric needs one entry per coordinate");
  std::vector<Expr> comps(n * n, Expr(0));
  for (std::size_t i = 0; i < n; ++i) comps[i * n + i] = diag[i];
  return Metric(std::move(chart), std::move(comps), std::move(defaults), signature);
}

std::vector<std::string> Metric::parameters() const {
  std::set<std::string> names;
  for (const auto& c : components_)
    for (auto& s : free_symbols(c)) names.insert(s);
  for (const auto& [k, v] : defaults_) names.insert(k);
  for (const auto& c : chart_.coordinates()) names.erase(c);
  return {names.begin(), names.end()};
}

std::vector<std::string> Metric::slots() const {
  std::vector<std::string> s = chart_.coordinates();
  for (auto& p : parameters()) s.push_back(p);
  return s;
}

Metric Metric::scaled(const Expr& factor) const {
  std::vector<Expr> comps;
  comps.reserve(components_.size());
  for (const auto& c : components_) comps.push_back(factor * c);
  return Metric(chart_, std::move(comps), defaults_, signature_);
}

Metric Metric::with_defaults(const Bindings& overrides) const {
  Metric m = *this;
  for (const auto& [k, v] : overrides) m.defaults_[k] = v;
  return m;
}

Bindings Metric::complete(const Bindings& point) const {
  Bindings b = defaults_;
  for (const auto& [k, v] : point) b[k] = v;
  for (const auto& s : slots())
    if (!b.count(s)) throw EvalError("unbound name '" + s + "'");
  return b;
}

Eigen::MatrixXd Metric::at(const Bindings& point) const {
  const Bindings b = complete(point);
  const std::size_t n = dim();
  Eigen::MatrixXd m(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = a; c < n; ++c) m(a, c) = m(c, a) = eval_at((*this)(a, c), b);
  return m;
}

// TensorField ---------------------------------------------------------------

TensorField::TensorField(Chart chart, std::vector<Index> valence, std::vector<Expr> components,
                         std::vector<IndexSymmetry> symmetries)
    : chart_(std::move(chart)),
      valence_(std::move(valence)),
      components_(std::move(components)),
      symmetries_(std::move(symmetries)) {
  const std::size_t n = chart_.dim();
  const std::size_t k = valence_.size();
  if (components_.size() != ipow(n, k)) throw GeometryError("tensor component count does not match valence");
  std::vector<std::size_t> idx(k, 0);
  for (std::size_t off = 0; off < components_.size(); ++off) {
    std::size_t rem = off;
    for (std::size_t i = k; i-- > 0;) {
      idx[i] = rem % n;
      rem /= n;
    }
    for (const auto& s : symmetries_) {
      if (s.first >= k || s.second >= k) throw GeometryError("symmetry refers to a missing index");
      if (idx[s.first] >= idx[s.second]) continue;
      auto swapped = idx;
      std::swap(swapped[s.first], swapped[s.second]);
      std::size_t other = 0;
      for (auto v : swapped) other = other * n + v;
      const Expr& x = components_[off];
      const Expr& y = components_[other];
      const bool ok = s.anti ? (x.is_zero() && y.is_zero()) || simplify(x + y).is_zero() : x == y;
      if (!ok) throw GeometryError("tensor component violates declared index symmetry");
    }
  }
}

std::size_t TensorField::offset(std::initializer_list<std::size_t> idx) const {
  std::size_t off = 0;
  for (auto v : idx) off = off * chart_.dim() + v;
  return off;
}

bool TensorField::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](const Expr& e) { return e.is_zero(); });
}

std::size_t TensorField::max_node_count() const {
  std::size_t m = 0;
  for (const auto& c : components_) m = std::max(m, c.size());
  return m;
}

// Curvature -----------------------------------------------------------------

TensorField inverse_metric(const Metric& g) { return compute_inverse(g); }

TensorField christoffel(const Metric& g) { return compute_christoffel(g, compute_inverse(g)); }

TensorField riemann(const Metric& g) { return compute_riemann(g, christoffel(g)); }

TensorField ricci(const Metric& g) { return contract_ricci(g, riemann(g)); }

Expr scalar_curvature(const Metric& g) { return compute_curvature(g).scalar; }

TensorField einstein_tensor(const Metric& g) { return compute_curvature(g).einstein; }

TensorField stress_energy(const Metric& g) { return einstein_tensor(g); }

Curvature compute_curvature(const Metric& g) {
  Curvature c;
  c.inverse = compute_inverse(g);
  c.christoffel = compute_christoffel(g, c.inverse);
  c.riemann = compute_riemann(g, c.christoffel);
  c.riemann_lowered = lower_first(g, c.riemann);
  c.ricci = contract_ricci(g, c.riemann);
  c.scalar = trace(c.ricci, c.inverse);
  c.einstein = build_einstein(g, c.ricci, c.scalar);
  return c;
}

TensorField raise_both(const TensorField& t, const TensorField& inverse) {
  const std::size_t n = t.chart().dim();
  std::vector<Expr> out(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<Expr> terms;
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          if (inverse(a, c).is_zero() || inverse(b, d).is_zero() || t(c, d).is_zero()) continue;
          terms.push_back(inverse(a, c) * inverse(b, d) * t(c, d));
        }
      out[a * n + b] = simplify(sum(terms));
    }
  return TensorField(t.chart(), {Index::Up, Index::Up}, std::move(out));
}

Expr trace(const TensorField& t, const TensorField& inverse) {
  const std::size_t n = t.chart().dim();
  std::vector<Expr> terms;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (inverse(a, b).is_zero() || t(a, b).is_zero()) continue;
      terms.push_back(inverse(a, b) * t(a, b));
    }
  return simplify(sum(terms));
}

std::vector<Expr> einstein_divergence(const Metric& g, const Curvature& curv) {
  const std::size_t n = g.dim();
  const TensorField up = raise_both(curv.einstein, curv.inverse);
  const auto& gamma = curv.christoffel;
  std::vector<Expr> out;
  for (std::size_t b = 0; b < n; ++b) {
    std::vector<Expr> terms;
    for (std::size_t a = 0; a < n; ++a) {
      terms.push_back(differentiate(up(a, b), g.chart().coordinate(a)));
      for (std::size_t e = 0; e < n; ++e) {
        if (!gamma(a, a, e).is_zero() && !up(e, b).is_zero()) terms.push_back(gamma(a, a, e) * up(e, b));
        if (!gamma(b, a, e).is_zero() && !up(a, e).is_zero()) terms.push_back(gamma(b, a, e) * up(a, e));
      }
    }
    out.push_back(simplify(sum(terms)));
  }
  return out;
}

// Frames --------------------------------------------------------------------

Frame coordinate_frame(const Metric& g) {
  const std::size_t n = g.dim();
  const bool lorentzian = g.signature() == Signature::Lorentzian;
  const auto samples = sample_points(g, 8, 11);
  Frame f{g.chart(), std::vector<std::vector<Expr>>(n, std::vector<Expr>(n, Expr(0)))};
  std::vector<std::size_t> order;  // frame slots in construction order
  auto require_positive = [&](const Expr& e, const std::string& what) {
    for (const auto& p : samples) {
      if (!(eval(e, p) > 0)) throw FrameError(what);
    }
  };
  std::size_t first_spatial = 0;
  if (lorentzian) {
    const Expr minus_gtt = simplify(-g(0, 0));
    require_positive(minus_gtt, "d/d" + g.chart().coordinate(0) + " is not timelike");
    f.vectors[0][0] = simplify(pow(minus_gtt, Expr::rational(-1, 2)));
    order.push_back(0);
    first_spatial = 1;
  }
  for (std::size_t i = n; i-- > first_spatial;) {
    std::vector<Expr> v(n, Expr(0));
    v[i] = Expr(1);
    for (std::size_t k : order) {
      const Expr proj = inner(g, v, f.vectors[k]);
      if (proj.is_zero()) continue;
      const Expr coef = (lorentzian && k == 0) ? proj : -proj;  // η_kk = −1 for e₀
      for (std::size_t a = 0; a < n; ++a) v[a] = simplify(v[a] + coef * f.vectors[k][a]);
    }
    const Expr norm2 = inner(g, v, v);
    require_positive(norm2, "degenerate frame: coordinate vector d/d" + g.chart().coordinate(i) +
                                " is not spacelike after orthogonalisation");
    const Expr scale = simplify(pow(norm2, Expr::rational(-1, 2)));
    for (std::size_t a = 0; a < n; ++a) f.vectors[i][a] = simplify(v[a] * scale);
    order.push_back(i);
  }
  return f;
}

Eigen::MatrixXd numeric_frame(const Eigen::MatrixXd& g, Signature signature) {
  const auto n = g.rows();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  const bool lorentzian = signature == Signature::Lorentzian;
  std::vector<Eigen::Index> order;
  Eigen::Index first_spatial = 0;
  if (lorentzian) {
    if (!(g(0, 0) < 0)) throw FrameError("time coordinate vector is not timelike");
    e(0, 0) = 1.0 / std::sqrt(-g(0, 0));
    order.push_back(0);
    first_spatial = 1;
  }
  for (Eigen::Index i = n - 1; i >= first_spatial; --i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, i);
    for (auto k : order) {
      const Eigen::VectorXd ek = e.row(k).transpose();
      const double proj = v.dot(g * ek);
      v -= ((lorentzian && k == 0) ? -proj : proj) * ek;
    }
    const double norm2 = v.dot(g * v);
    if (!(norm2 > 0)) throw FrameError("degenerate frame at evaluation point");
    e.row(i) = v.transpose() / std::sqrt(norm2);
    order.push_back(i);
  }
  return e;
}

double frame_orthonormality_error(const Frame& frame, const Metric& g, const std::vector<Bindings>& points) {
  const std::size_t n = g.dim();
  double worst = 0;
  for (const auto& p : points) {
    const Bindings b = g.complete(p);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < n; ++a) e(i, a) = eval(frame.vectors[i][a], b);
    const Eigen::MatrixXd gram = e * g.at(b) * e.transpose();
    Eigen::MatrixXd eta = Eigen::MatrixXd::Identity(n, n);
    if (g.signature() == Signature::Lorentzian) eta(0, 0) = -1;
    worst = std::max(worst, (gram - eta).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Expr> frame_components(const TensorField& t, const Frame& frame) {
  const std::size_t n = t.chart().dim();
  const bool symmetric = !t.symmetries().empty() && !t.symmetries().front().anti;
  std::vector<Expr> out(n * n);
  for (std::size_t al = 0; al < n; ++al)
    for (std::size_t be = symmetric ? al : 0; be < n; ++be) {
      std::vector<Expr> terms;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          const Expr& x = frame.vectors[al][a];
          const Expr& y = frame.vectors[be][b];
          if (x.is_zero() || y.is_zero() || t(a, b).is_zero()) continue;
          terms.push_back(x * y * t(a, b));
        }
      out[al * n + be] = simplify(sum(terms));
      if (symmetric) out[be * n + al] = out[al * n + be];
    }
  return out;
}

CurvatureNorm::CurvatureNorm(const Metric& g) : CurvatureNorm(g, compute_curvature(g)) {}

CurvatureNorm::CurvatureNorm(const Metric& g, const Curvature& curv) : metric_(g), slots_(g.slots()) {
  for (const auto& c : g.components()) metric_code_.emplace_back(c, slots_);
  for (const auto& c : curv.riemann_lowered.components()) riemann_code_.emplace_back(c, slots_);
}

double CurvatureNorm::operator()(const Bindings& point) const {
  const Bindings b = metric_.complete(point);
  std::vector<double> values;
  values.reserve(slots_.size());
  for (const auto& s : slots_) values.push_back(b.at(s));
  const auto n = static_cast<Eigen::Index>(metric_.dim());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index c = 0; c < n; ++c) g(a, c) = metric_code_[a * n + c](values);
  const Eigen::MatrixXd e = numeric_frame(g, metric_.signature());

  const auto N = static_cast<std::size_t>(n);
  std::vector<double> r(N * N * N * N);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = riemann_code_[i](values);
  // transform one index at a time: r_{..a..} → Σ_a e(α,a) r_{..a..}
  std::vector<double> tmp(r.size());
  for (std::size_t slot = 0; slot < 4; ++slot) {
    std::size_t stride = 1;
    for (std::size_t k = slot + 1; k < 4; ++k) stride *= N;
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t off = 0; off < r.size(); ++off) {
      const std::size_t idx = (off / stride) % N;
      const std::size_t base = off - idx * stride;
      for (std::size_t al = 0; al < N; ++al)
        tmp[base + al * stride] += e(static_cast<Eigen::Index>(al), static_cast<Eigen::Index>(idx)) * r[off];
    }
    std::swap(r, tmp);
  }
  double s = 0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

double curvature_norm(const Metric& g, const Bindings& point) { return CurvatureNorm(g)(point); }

void check_signature(const Metric& g, const std::vector<Bindings>& points) {
  for (const auto& p : points) {
    const Eigen::MatrixXd m = g.at(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
    int negative = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) <= 1e-14 * scale) throw GeometryError("metric is degenerate at a sample point");
      if (ev(i) < 0) ++negative;
    }
    const int expected = g.signature() == Signature::Lorentzian ? 1 : 0;
    if (negative != expected)
      throw GeometryError(g.signature() == Signature::Lorentzian ? "metric is not Lorentzian (-,+,...,+) at a sample point"
                                                                 : "metric is not positive definite at a sample point");
  }
}

// Verification --------------------------------------------------------------

std::vector<Bindings> sample_points(const Metric& g, std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<Bindings> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Bindings b = g.defaults();
    for (std::size_t i = 0; i < g.dim(); ++i) {
      const auto r = g.chart().range(i);
      b[g.chart().coordinate(i)] = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    }
    out.push_back(std::move(b));
  }
  return out;
}

ZeroCheck check_zero(const Expr& e, const std::vector<Bindings>& samples, VerificationMode mode, double tol) {
  ZeroCheck r;
  const Expr s = e.size() > kSymbolicNodeLimit ? e : simplify(e);
  r.nodes = s.size();
  if (mode != VerificationMode::Numeric && s.is_zero()) {
    r.passed = true;
    r.path = CheckPath::SymbolicZero;
    return r;
  }
  if (mode == VerificationMode::Symbolic) {
    r.passed = false;
    r.path = CheckPath::SymbolicZero;
    r.residual = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.path = CheckPath::NumericBounded;
  double worst = 0;
  for (const auto& p : samples) worst = std::max(worst, std::abs(eval(s, p)));
  r.residual = worst;
  r.passed = worst <= tol;
  return r;
}

std::string to_string(VerificationMode mode) {
  switch (mode) {
    case VerificationMode::Symbolic: return "symbolic";
    case VerificationMode::Numeric: return "numeric";
    case VerificationMode::Auto: return "auto";
  }
  return {};
}

std::string to_string(CheckPath path) { return path == CheckPath::SymbolicZero ? "symbolic-zero" : "numeric-bounded"; }

VerificationMode parse_mode(std::string_view text) {
  if (text == "symbolic") return VerificationMode::Symbolic;
  if (text == "numeric") return VerificationMode::Numeric;
  if (text == "auto") return VerificationMode::Auto;
  throw std::invalid_argument("unknown verification mode '" + std::string(text) + "'");
}

}  // namespace elim
