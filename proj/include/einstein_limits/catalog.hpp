#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "einstein_limits/geometry.hpp"

namespace elim {

/// Invalid family parameters or perturbations.
class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// diag(−1, 1, …, 1) on (t, x1, …, xn); n ≥ 1.
Metric minkowski(int n);

struct KasnerParams {
  std::vector<Rational> exponents;
};

/// Parses a comma-separated list of exact exponents such as "2/3,2/3,-1/3".
KasnerParams parse_kasner_exponents(std::string_view text);

/// −n⁻² dt² + Σ t^{2p_k} (dx_k)² on (t, x1, …, xn), with Σp = Σp² = 1 checked exactly.
Metric kasner(const KasnerParams& params);
/// Same metric without the exponent check (for exercising invalid exponents).
Metric kasner_unchecked(const KasnerParams& params);

/// Constants and θ-profiles of the T²-symmetric family. Constants are exact
/// or floating Exprs; profiles are Exprs in the symbol `theta`.
struct T2ModelParams {
  Expr K = Expr(1);
  Expr CU = Expr(0);
  Expr Cinf = Expr::rational(5, 4);
  Expr L = Expr(1);
  Expr G = Expr(0);
  /// Keep K, CU, Cinf as symbols in the components (values go to the metric
  /// defaults) instead of inlining them.
  bool symbolic_constants = true;
};

/// Throws CatalogError unless K ≠ 0, Cinf > 0, the profiles depend on theta
/// only and 𝓛 > 0 at sampled θ.
void validate(const T2ModelParams& params);

/// The constants as they appear in components: symbols or inlined values.
struct T2Constants {
  Expr K;
  Expr CU;
  Expr Cinf;
  Bindings defaults;
};
T2Constants constants_of(const T2ModelParams& params);

/// The metric functions of the general T²-symmetric form
///   e^{2(η−U)}(−dR² + a⁻²dθ²) + e^{2U}(dx + G dθ)² + e^{−2U}R²(dy + H dθ)²
/// with e^{2η} supplied directly.
struct T2Functions {
  Expr exp_2eta;
  Expr U;
  Expr ainv;
  Expr G;
  Expr H;
};

/// Assembles the general form on a chart whose first coordinate is the area
/// radius R (`radius` is that coordinate's expression, normally the symbol).
Metric t2_general(const Chart& chart, const T2Functions& f, const Expr& radius, Bindings defaults);

/// Leading asymptotic functions in terms of the radius: e^{2η} = K⁻²R²,
/// U = C_U, a⁻¹ = (2/√5)C∞^{1/2}R^{1/2}𝓛, G = 𝓖, H = (4/(K√5))C∞^{1/2}R^{1/2}𝓛.
T2Functions t2_leading_functions(const T2ModelParams& params, const Expr& radius);

/// Model metric on (t, theta, x, y) with t = R²:
///   −¼K⁻²e^{−2C_U}dt² + ⅘K⁻²e^{−2C_U}C∞𝓛²t^{3/2}dθ² + e^{2C_U}(dx + 𝓖dθ)²
///   + e^{−2C_U}t(dy + (4/(K√5))C∞^{1/2}𝓛t^{1/4}dθ)².
Metric t2_model(const T2ModelParams& params);

/// Limit metric on (Rhat, thetahat, xhat, yhat) in the general form with
/// e^{2η̂} = K⁻²R̂², â⁻¹ = (2/√5)C∞^{1/2}R̂^{1/2}, Û = C_U, Ĝ = 0,
/// Ĥ = (4/(K√5))C∞^{1/2}R̂^{1/2}.
Metric t2_limit(const T2ModelParams& params);
/// The same limit on (u, thetahat, xhat, yhat) with u = R̂².
Metric t2_limit_u(const T2ModelParams& params);
/// Hat coefficients of the limit, in the symbol Rhat.
T2Functions t2_limit_functions(const T2ModelParams& params);

enum class PerturbedFunction { Eta, U, AInv, G, H };

std::string to_string(PerturbedFunction f);
PerturbedFunction parse_perturbed_function(std::string_view name);

/// Adds profile(θ)·R^exponent to one metric function. For Eta the shift is
/// applied to η itself, i.e. e^{2η} → K⁻²R²·e^{2·profile·R^exponent}.
struct Perturbation {
  PerturbedFunction target;
  Expr profile;
  Expr exponent;  // exact or floating number
};

/// Largest admissible decay exponent, or nullopt when only a zero profile is
/// admissible (G). For Eta: −1/4 for a θ-free profile, −1/2 otherwise.
std::optional<double> perturbation_allowance(const Perturbation& p);
/// Throws CatalogError if the perturbation decays slower than allowed.
void validate(const Perturbation& p);

/// Model metric on (t, theta, x, y) with perturbed metric functions. An empty
/// list returns t2_model(params).
Metric apply_perturbation(const T2ModelParams& params, const std::vector<Perturbation>& perturbations);

// ---------------------------------------------------------------------------
// Metric definition files
//
//   coordinates: t x y z
//   signature: lorentzian            (or riemannian; default lorentzian)
//   param K = 1
//   range t = 0.5 2
//   g[t,t] = -1/9
//   g[x,x] = t^(4/3)
//
// `#` starts a comment. Unlisted components are zero; an off-diagonal entry
// sets both orders and may be given once.

Metric parse_metric_definition(std::string_view text);
std::string write_metric_definition(const Metric& g);

}  // namespace elim
