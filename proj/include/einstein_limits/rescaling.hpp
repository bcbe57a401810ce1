#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "einstein_limits/catalog.hpp"
#include "einstein_limits/geometry.hpp"

namespace elim {

class RescalingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// scale · Jᵀ (g ∘ map) J, where `old_in_new` gives each old coordinate as an
/// expression in the new chart's coordinates. Symbols in the map that are not
/// new coordinates become parameters; `extra_defaults` may bind them.
Metric pullback(const Metric& g, const Chart& new_chart, const std::vector<Expr>& old_in_new,
                const Expr& scale = Expr(1), const Bindings& extra_defaults = {});

// ---------------------------------------------------------------------------
// Numeric metric fields and grids

/// Numeric metric components as a function of the coordinates.
class MetricField {
 public:
  virtual ~MetricField() = default;
  virtual std::size_t dim() const = 0;
  virtual Eigen::MatrixXd at(std::span<const double> x) const = 0;
};

/// A symbolic metric compiled once; parameters come from `bindings` or the
/// metric defaults.
class CompiledMetric : public MetricField {
 public:
  explicit CompiledMetric(const Metric& g, const Bindings& bindings = {});
  std::size_t dim() const override { return dim_; }
  Eigen::MatrixXd at(std::span<const double> x) const override;

 private:
  std::size_t dim_;
  std::vector<std::string> slots_;
  std::vector<double> parameter_values_;
  std::vector<CompiledExpr> code_;
};

/// One old coordinate as a function of the matching new coordinate:
/// returns (value, derivative).
using AxisMap = std::function<std::pair<double, double>(double)>;

/// Pullback along a map that acts coordinate by coordinate, evaluated
/// numerically (diagonal Jacobian).
class AxisPullback : public MetricField {
 public:
  AxisPullback(std::shared_ptr<const MetricField> g, std::vector<AxisMap> axes, double scale);
  std::size_t dim() const override { return g_->dim(); }
  Eigen::MatrixXd at(std::span<const double> x) const override;

 private:
  std::shared_ptr<const MetricField> g_;
  std::vector<AxisMap> axes_;
  double scale_;
};

/// θ(θ̂) defined by ∫₀^θ density = factor·θ̂ for a positive density, via
/// adaptive Gauss–Kronrod quadrature and bracketed root finding (1e−12).
/// prime() precomputes values so that later lookups are read-only.
class ImplicitAxis {
 public:
  ImplicitAxis(const Expr& density, std::string variable, double factor);
  std::pair<double, double> operator()(double new_value) const;
  void prime(const std::vector<double>& new_values);
  /// ∫₀^θ density.
  double primitive(double old_value) const;

 private:
  std::pair<double, double> solve(double new_value) const;
  CompiledExpr density_;
  double factor_;
  std::vector<std::pair<double, std::pair<double, double>>> cache_;  // sorted by new value
};

struct GridSpec {
  std::vector<CoordinateRange> box;
  int points_per_axis = 9;

  std::size_t size() const;
  std::vector<double> axis(std::size_t i) const;
  /// Node k in row-major order over the axes.
  std::vector<double> node(std::size_t k) const;
};

/// max over grid nodes and components of |a_{μν} − b_{μν}|.
double sup_distance(const MetricField& a, const MetricField& b, const GridSpec& grid, unsigned threads = 1);
/// Symbolic metrics on the same chart (compared at their defaults).
double sup_distance(const Metric& a, const Metric& b, const GridSpec& grid, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Rescaling plans

enum class RescalingKind { TypeIII, TypeII };

std::string to_string(RescalingKind kind);

/// Comparison maps φ_i(u, y) = (σ_i(u), η_i(y)) with scale factors c_i.
/// `map` gives the old coordinates in the limit chart; the symbol `ti` stands
/// for the basepoint time and `c` for the scale factor.
struct RescalingPlan {
  RescalingKind kind = RescalingKind::TypeIII;
  std::vector<double> times;
  std::vector<double> scales;
  Chart limit_chart;
  std::vector<Expr> map;
  Expr scale;  // c_i in terms of ti / c
  /// Spatial basepoints x_i per time, keyed by old coordinate; the map refers
  /// to them as `<coordinate>_i`. Missing entries are the origin.
  std::vector<Bindings> basepoints;
  double basepoint_u = 1.0;
  int j = 2;
  /// Set when an old coordinate is only implicitly defined by
  /// ∫₀^old density = ti^{exponent}·new; `map[implicit_index]` is then unused.
  std::optional<std::size_t> implicit_index;
  Expr implicit_density;
  Expr implicit_exponent;

  /// K_j: [1/j, j] (type III) or [−j, j] (type II) in time, [−j, j] in space.
  std::vector<CoordinateRange> compact_set() const;
  Bindings parameters(std::size_t i) const;
  /// σ_i(u_∞) = t_i and a nonvanishing Jacobian on K_j, for every i.
  void check() const;
};

/// σ(u) = t_i u, x_k = t_i^{1−p_k} y_k, c_i = t_i⁻²; limit chart (u, y1, …, yn).
RescalingPlan kasner_plan(const KasnerParams& p, std::vector<double> times, int j = 2);

/// σ(u) = t_i u, θ from dθ̂ = t_i^{−1/4}𝓛dθ, x = t_i x̂, y = t_i^{1/2}ŷ,
/// c_i = t_i⁻²; limit chart (u, thetahat, xhat, yhat). For constant 𝓛 the θ
/// map is explicit: θ = t_i^{1/4}θ̂/𝓛.
RescalingPlan t2_plan(const T2ModelParams& params, std::vector<double> times, int j = 2);

/// c_i = |Rm(p_i)|, σ(u) = c_i^{−1/2}u + t_i and x = x_i + c_i^{−1/2}y on
/// (u, y1, …). Throws if the curvature vanishes at a basepoint or if the
/// rescaled norm at u = 0 differs from 1 by more than 1e−9.
RescalingPlan type_ii_plan(const Metric& g, const std::vector<Bindings>& points, int j = 1);

/// c_i φ_i* g with `ti` / `c` left symbolic (explicit maps only).
Metric rescaled_metric(const Metric& g, const RescalingPlan& plan);

/// The i-th rescaled metric as a numeric field (explicit or implicit maps).
std::shared_ptr<MetricField> rescaled_field(const Metric& g, const RescalingPlan& plan, std::size_t i,
                                           const GridSpec* prime_for = nullptr);

// ---------------------------------------------------------------------------
// Convergence studies

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_low = 0;   // 95% confidence interval
  double slope_high = 0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = intercept + slope·x with a Student-t interval.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergencePoint {
  double ti;
  int j;
  double sup_distance;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  /// Fit of log(distance) against log(t_i); absent when some distance is 0.
  std::optional<LinearFit> fit;
  GridSpec grid;
  bool symbolic_pullback = false;
};

/// Distances between the rescaled metrics and the limit on K_j, with the
/// fitted decay exponent. Needs ≥ 4 increasing t_i spanning ≥ 4 decades.
ConvergenceReport convergence_study(const Metric& g, const Metric& limit, const RescalingPlan& plan,
                                    int points_per_axis = 9, unsigned threads = 1);

std::string to_csv(const ConvergenceReport& report);

/// ∫_{R0}^{R} e^{⟨η⟩−⟨U⟩} dr with ⟨η⟩ = log(r/|K|), ⟨U⟩ = C_U (adaptive
/// quadrature, relative tolerance 1e−10).
double proper_time_estimate(const T2ModelParams& params, double R0, double R);

}  // namespace elim
