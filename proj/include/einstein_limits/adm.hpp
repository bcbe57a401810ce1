#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "einstein_limits/catalog.hpp"
#include "einstein_limits/geometry.hpp"

namespace elim {

class AdmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A slice of g = −L²dt² + h(t). `h` is Riemannian on the spatial chart and
/// carries the time coordinate as a parameter.
struct AdmSlice {
  std::string time;
  Metric h;
  Expr lapse;
  std::vector<Expr> second_form;  // K_ab, row-major
  Expr mean_curvature;            // h^{ab}K_ab

  std::size_t dim() const { return h.dim(); }
  const Expr& K(std::size_t a, std::size_t b) const { return second_form[a * dim() + b]; }
};

/// Reads off h and L and sets K_ab = −(1/(2L))∂_t h_ab, so expanding slices
/// have negative mean curvature. Throws AdmError when g has dt·dx terms or
/// −g_tt is not positive at sampled points.
AdmSlice adm_split(const Metric& g);

/// h^{ac}h^{bd}K_ab K_cd.
Expr second_form_norm_squared(const AdmSlice& s);

/// R_h − |K|² + H².
Expr hamiltonian_residual(const AdmSlice& s);

/// ½(R_h − |K|² + H²), the normal-normal Einstein component via Gauss.
Expr energy_density(const AdmSlice& s);

/// energy_density(adm_split(g)) − G(∂_t,∂_t)/L²; identically zero.
Expr gauss_mismatch(const Metric& g);

struct BackreactionResidual {
  Expr lhs;         // η̂_R̂ + K²e^{2η̂}/(4R̂³) − âR̂(â⁻¹Û_R̂² + âÛ_θ̂²)
  Expr difference;  // lhs − 5/(4R̂)
  Expr factor;      // G_R̂R̂ / lhs for the limit metric
};

/// The backreaction balance for the limit coefficients, in the symbol Rhat.
BackreactionResidual lefloch_residual(const T2ModelParams& params);

struct FrameComponent {
  std::size_t a;
  std::size_t b;
  Expr value;
  ZeroCheck zero;
};

struct TraceReport {
  Expr trace;   // g^{ab}T_ab
  Expr scalar;  // R
  ZeroCheck trace_zero;
  ZeroCheck scalar_zero;
  std::vector<FrameComponent> nonzero;  // a ≤ b, in the coordinate frame
};

/// Trace, scalar curvature and nonvanishing orthonormal-frame components of
/// T = Ric − ½Rg.
TraceReport gw_trace_check(const Metric& g, VerificationMode mode = VerificationMode::Auto,
                           std::size_t samples = 10);

struct ConstraintEntry {
  std::string name;
  Expr expr;
  std::vector<double> values;  // at the report's sample points
  ZeroCheck zero;
};

struct ConstraintReport {
  std::vector<Bindings> samples;
  std::vector<ConstraintEntry> entries;  // hamiltonian, gauss mismatch, energy density[, lefloch]

  const ConstraintEntry* find(std::string_view name) const;
};

/// Constraint residuals of g at sampled points. With `t2`, the backreaction
/// difference for those parameters is added.
ConstraintReport constraint_report(const Metric& g, VerificationMode mode, std::size_t samples = 10,
                                   const T2ModelParams* t2 = nullptr);

}  // namespace elim
