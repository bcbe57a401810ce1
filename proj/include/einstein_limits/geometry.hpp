#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "einstein_limits/expr.hpp"

namespace elim {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMetricError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class FrameError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

enum class Signature { Lorentzian, Riemannian };

struct CoordinateRange {
  double lo;
  double hi;
};

/// Ordered coordinate names; for Lorentzian charts the first is time.
/// All coordinates are real-line valued; the optional ranges only steer
/// sampling.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> coordinates, std::vector<std::optional<CoordinateRange>> ranges = {});

  std::size_t dim() const { return coordinates_.size(); }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const std::string& coordinate(std::size_t i) const { return coordinates_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Declared range, or [1/2, 2] for the first coordinate and [-1, 1] otherwise.
  CoordinateRange range(std::size_t i) const;
  bool has_range(std::size_t i) const { return i < ranges_.size() && ranges_[i].has_value(); }
  void set_range(std::size_t i, CoordinateRange r);

  friend bool operator==(const Chart& a, const Chart& b) { return a.coordinates_ == b.coordinates_; }

 private:
  std::vector<std::string> coordinates_;
  std::vector<std::optional<CoordinateRange>> ranges_;
};

/// Symmetric rank-2 covariant tensor on a chart with a declared signature.
/// Components are stored simplified. Symbols that are not coordinates are
/// parameters; `defaults` supplies their values for numeric work.
class Metric {
 public:
  Metric() = default;
  /// `components` is row-major dim×dim and must be symmetric after simplification.
  Metric(Chart chart, std::vector<Expr> components, Bindings defaults = {},
         Signature signature = Signature::Lorentzian);

  static Metric diagonal(Chart chart, const std::vector<Expr>& diag, Bindings defaults = {},
                         Signature signature = Signature::Lorentzian);

  const Chart& chart() const { return chart_; }
  std::size_t dim() const { return chart_.dim(); }
  const Expr& operator()(std::size_t a, std::size_t b) const { return components_[a * dim() + b]; }
  const std::vector<Expr>& components() const { return components_; }
  const Bindings& defaults() const { return defaults_; }
  Signature signature() const { return signature_; }
  /// Free symbols that are not coordinates, sorted.
  std::vector<std::string> parameters() const;
  /// Coordinates followed by parameters: the slot layout for compiled evaluation.
  std::vector<std::string> slots() const;

  Metric scaled(const Expr& factor) const;
  Metric with_defaults(const Bindings& overrides) const;
  /// Numeric matrix at a point (coordinates; parameters fall back to defaults).
  Eigen::MatrixXd at(const Bindings& point) const;
  /// Completes a point with parameter defaults; throws if anything is unbound.
  Bindings complete(const Bindings& point) const;

 private:
  Chart chart_;
  std::vector<Expr> components_;
  Bindings defaults_;
  Signature signature_ = Signature::Lorentzian;
};

enum class Index { Up, Down };

/// Antisymmetry or symmetry between two index slots, verified on construction.
struct IndexSymmetry {
  std::size_t first;
  std::size_t second;
  bool anti = false;
};

/// Dense multi-index array of expressions; component (i0,...,ik) lives at
/// row-major offset.
class TensorField {
 public:
  TensorField() = default;
  TensorField(Chart chart, std::vector<Index> valence, std::vector<Expr> components,
              std::vector<IndexSymmetry> symmetries = {});

  const Chart& chart() const { return chart_; }
  std::size_t rank() const { return valence_.size(); }
  const std::vector<Index>& valence() const { return valence_; }
  const std::vector<Expr>& components() const { return components_; }
  const std::vector<IndexSymmetry>& symmetries() const { return symmetries_; }

  const Expr& at(std::initializer_list<std::size_t> idx) const { return components_[offset(idx)]; }
  const Expr& operator()(std::size_t a, std::size_t b) const { return at({a, b}); }
  const Expr& operator()(std::size_t a, std::size_t b, std::size_t c) const { return at({a, b, c}); }
  const Expr& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return at({a, b, c, d}); }

  bool is_zero() const;
  std::size_t max_node_count() const;

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  Chart chart_;
  std::vector<Index> valence_;
  std::vector<Expr> components_;
  std::vector<IndexSymmetry> symmetries_;
};

// ---------------------------------------------------------------------------
// Curvature

TensorField inverse_metric(const Metric& g);
/// Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc})
TensorField christoffel(const Metric& g);
/// R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
TensorField riemann(const Metric& g);
/// Ric_{bd} = R^a_{bad}
TensorField ricci(const Metric& g);
Expr scalar_curvature(const Metric& g);
/// G = Ric − ½ R g
TensorField einstein_tensor(const Metric& g);
/// Effective stress-energy T = G (no coupling constant).
TensorField stress_energy(const Metric& g);

/// All curvature quantities of one metric, computed once.
struct Curvature {
  TensorField inverse;
  TensorField christoffel;
  TensorField riemann;          // R^a_{bcd}
  TensorField riemann_lowered;  // R_{abcd}
  TensorField ricci;
  Expr scalar;
  TensorField einstein;
};

Curvature compute_curvature(const Metric& g);

/// ∇_a G^{ab}; vanishes identically for any metric (contracted Bianchi).
std::vector<Expr> einstein_divergence(const Metric& g, const Curvature& curv);

/// Raises both indices of a covariant rank-2 tensor.
TensorField raise_both(const TensorField& t, const TensorField& inverse);
/// g^{ab} T_{ab}
Expr trace(const TensorField& t, const TensorField& inverse);

// ---------------------------------------------------------------------------
// Frames and norms

/// Vector fields e_α = Σ_a vectors[α][a] ∂_a.
struct Frame {
  Chart chart;
  std::vector<std::vector<Expr>> vectors;
};

/// Orthonormal frame: e₀ = (−g(∂_t,∂_t))^{−1/2} ∂_t, then Gram–Schmidt over the
/// spatial coordinate vectors taken from the last coordinate to the first, so
/// e_i is g-orthogonal to every ∂_j with j after i.
Frame coordinate_frame(const Metric& g);

/// Same construction applied to a numeric metric matrix; rows are the vectors.
Eigen::MatrixXd numeric_frame(const Eigen::MatrixXd& g, Signature signature = Signature::Lorentzian);

/// max |g(e_α,e_β) − η_{αβ}| over the given points.
double frame_orthonormality_error(const Frame& frame, const Metric& g, const std::vector<Bindings>& points);

/// Symbolic frame components T(e_α, e_β) of a covariant rank-2 tensor.
std::vector<Expr> frame_components(const TensorField& t, const Frame& frame);

/// |Rm| from the orthonormal-frame components of the Riemann tensor.
class CurvatureNorm {
 public:
  explicit CurvatureNorm(const Metric& g);
  CurvatureNorm(const Metric& g, const Curvature& curv);
  double operator()(const Bindings& point) const;

 private:
  Metric metric_;
  std::vector<std::string> slots_;
  std::vector<CompiledExpr> metric_code_;
  std::vector<CompiledExpr> riemann_code_;
};

double curvature_norm(const Metric& g, const Bindings& point);

/// Checks that the metric has the declared signature at each point
/// (eigenvalue signs); throws GeometryError otherwise.
void check_signature(const Metric& g, const std::vector<Bindings>& points);

// ---------------------------------------------------------------------------
// Verification modes

enum class VerificationMode { Symbolic, Numeric, Auto };
enum class CheckPath { SymbolicZero, NumericBounded };

/// Simplified components larger than this switch `Auto` checks to sampling.
inline constexpr std::size_t kSymbolicNodeLimit = 20000;

struct ZeroCheck {
  bool passed = false;
  CheckPath path = CheckPath::SymbolicZero;
  double residual = 0.0;  // max |value| over samples; 0 on the symbolic path
  std::size_t nodes = 0;
};

/// Deterministic interior sample points: coordinates uniform in the chart
/// ranges, parameters at their defaults.
std::vector<Bindings> sample_points(const Metric& g, std::size_t count, unsigned seed = 1);

ZeroCheck check_zero(const Expr& e, const std::vector<Bindings>& samples, VerificationMode mode, double tol = 1e-9);

std::string to_string(VerificationMode mode);
std::string to_string(CheckPath path);
VerificationMode parse_mode(std::string_view text);

}  // namespace elim
