#include "einstein_limits/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "einstein_limits/adm.hpp"
#include "einstein_limits/parallel.hpp"
#include "einstein_limits/rescaling.hpp"

namespace elim {

namespace {

const std::vector<std::string> kCommands{"curvature", "verify", "converge", "report"};
const std::vector<std::string> kFamilies{"minkowski", "kasner", "t2-model", "t2-limit", "t2-limit-u"};
const std::vector<double> kDefaultTimes{1e2, 1e4, 1e6, 1e8};
constexpr std::size_t kSamples = 20;

bool is_t2(const std::string& family) { return family.rfind("t2-", 0) == 0; }

struct Selection {
  std::string family;  // one of kFamilies, or "file"
  Metric g;
  std::optional<KasnerParams> kasner;
  std::optional<T2ModelParams> t2;
};

T2ModelParams t2_params(const RunConfig& c) {
  T2ModelParams p;
  if (!c.K.empty()) p.K = parse(c.K);
  if (!c.CU.empty()) p.CU = parse(c.CU);
  if (!c.Cinf.empty()) p.Cinf = parse(c.Cinf);
  if (!c.Lprofile.empty()) p.L = parse(c.Lprofile);
  if (!c.Gprofile.empty()) p.G = parse(c.Gprofile);
  validate(p);
  return p;
}

std::vector<Perturbation> perturbations(const RunConfig& c) {
  std::vector<Perturbation> out;
  for (const auto& text : c.perturb) {
    const auto first = text.find(':');
    const auto last = text.rfind(':');
    if (first == std::string::npos || first == last)
      throw ConfigError("--perturb expects target:profile:exponent, got '" + text + "'");
    Perturbation p{parse_perturbed_function(text.substr(0, first)), parse(text.substr(first + 1, last - first - 1)),
                   parse(text.substr(last + 1))};
    validate(p);
    out.push_back(p);
  }
  return out;
}

Selection select_metric(const RunConfig& c, const std::string& family) {
  const bool known = std::find(kFamilies.begin(), kFamilies.end(), family) != kFamilies.end();
  Selection s;
  s.family = known ? family : "file";
  if (!c.p.empty() && s.family != "kasner") throw ConfigError("--p only applies to --metric kasner");
  const bool t2_flags = !(c.K.empty() && c.CU.empty() && c.Cinf.empty() && c.Lprofile.empty() && c.Gprofile.empty());
  if (t2_flags && !is_t2(s.family)) throw ConfigError("--K/--CU/--Cinf/--Lprofile/--Gprofile only apply to T2 metrics");
  if (!c.perturb.empty() && s.family != "t2-model") throw ConfigError("--perturb only applies to --metric t2-model");

  if (s.family == "minkowski") {
    s.g = minkowski(3);
  } else if (s.family == "kasner") {
    s.kasner = parse_kasner_exponents(c.p.empty() ? "2/3,2/3,-1/3" : c.p);
    s.g = kasner(*s.kasner);
  } else if (is_t2(s.family)) {
    s.t2 = t2_params(c);
    if (s.family == "t2-model") s.g = apply_perturbation(*s.t2, perturbations(c));
    if (s.family == "t2-limit") s.g = t2_limit(*s.t2);
    if (s.family == "t2-limit-u") s.g = t2_limit_u(*s.t2);
  } else {
    std::ifstream in(family);
    if (!in) throw ConfigError("unknown metric '" + family + "' (not a family name or a readable file)");
    std::stringstream text;
    text << in.rdbuf();
    try {
      s.g = parse_metric_definition(text.str());
    } catch (const ParseError& e) {
      throw ConfigError(std::string("metric file: ") + e.what());
    }
  }
  return s;
}

Json metric_json(const Selection& s) {
  Json j;
  j["family"] = s.family;
  if (s.kasner) {
    Json p = Json::array();
    for (const auto& e : s.kasner->exponents) p.push_back(e.get_str());
    j["exponents"] = p;
  }
  if (s.t2) {
    j["K"] = expr_string(s.t2->K);
    j["CU"] = expr_string(s.t2->CU);
    j["Cinf"] = expr_string(s.t2->Cinf);
    j["Lprofile"] = expr_string(s.t2->L);
    j["Gprofile"] = expr_string(s.t2->G);
  }
  j["metric"] = to_json(s.g);
  return j;
}

std::string pair_name(const Chart& c, std::size_t a, std::size_t b) {
  return c.coordinate(a) + "," + c.coordinate(b);
}

// ---------------------------------------------------------------------------
// Checks

struct Checks {
  Json list = Json::array();
  bool all_passed = true;

  void add(const std::string& name, const ZeroCheck& z, Json detail = Json::object()) {
    Json j;
    j["name"] = name;
    j["passed"] = z.passed;
    j["mode"] = to_string(z.path);
    j["residual"] = z.residual;
    if (!detail.empty()) j["detail"] = detail;
    all_passed = all_passed && z.passed;
    list.push_back(j);
  }
  /// A numeric inequality or agreement; `residual` is the measured quantity.
  void add(const std::string& name, bool passed, double residual, Json detail = Json::object()) {
    ZeroCheck z;
    z.passed = passed;
    z.path = CheckPath::NumericBounded;
    z.residual = residual;
    add(name, z, std::move(detail));
  }
  void add_exact(const std::string& name, bool passed, Json detail = Json::object()) {
    ZeroCheck z;
    z.passed = passed;
    z.path = CheckPath::SymbolicZero;
    add(name, z, std::move(detail));
  }
};

/// Zero check over every component, keeping the worst one.
ZeroCheck all_zero(const std::vector<Expr>& comps, const std::vector<Bindings>& samples, VerificationMode mode) {
  ZeroCheck worst;
  worst.passed = true;
  for (const auto& e : comps) {
    const ZeroCheck z = check_zero(e, samples, mode);
    worst.nodes = std::max(worst.nodes, z.nodes);
    if (z.path == CheckPath::NumericBounded) worst.path = z.path;
    if (!z.passed) worst.passed = false;
    if (std::isnan(z.residual) || z.residual > worst.residual) worst.residual = z.residual;
  }
  return worst;
}

void erratum_suite(const Selection& s, VerificationMode mode, Checks& out, Json& extra) {
  const Metric& g = s.g;
  const auto samples = sample_points(g, kSamples);
  const Curvature curv = compute_curvature(g);
  const std::size_t n = g.dim();

  const ZeroCheck scalar = check_zero(curv.scalar, samples, mode, 1e-10);
  extra["scalar_curvature"] = expr_string(curv.scalar);
  out.add("scalar_curvature_zero", scalar);

  Json nonzero = Json::array();
  std::set<std::pair<std::size_t, std::size_t>> found;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      if (!check_zero(curv.einstein(a, b), samples, mode, 1e-10).passed) {
        found.insert({a, b});
        nonzero.push_back(pair_name(g.chart(), a, b));
      }
  const std::set<std::pair<std::size_t, std::size_t>> expected{{0, 0}, {1, 1}};
  out.add_exact("einstein_nonzero_components", found == expected, Json{{"nonzero", nonzero}});

  const TraceReport tr = gw_trace_check(g, mode, kSamples);
  out.add("frame_trace_zero", tr.trace_zero);
  std::set<std::pair<std::size_t, std::size_t>> frame_found;
  for (const auto& c : tr.nonzero) frame_found.insert({c.a, c.b});
  out.add_exact("frame_nonzero_components", frame_found == expected);

  const Frame frame = coordinate_frame(g);
  const std::vector<Expr> fc = frame_components(curv.einstein, frame);
  const Expr t00 = fc[0];
  const Expr t11 = fc[n + 1];
  out.add("frame_components_equal", check_zero(t11 - t00, samples, mode, 1e-10));
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) lowest = std::min(lowest, eval(t00, p));
  out.add("energy_density_positive", lowest > 0, lowest);
  extra["energy_density"] = expr_string(simplify(t00));
}

void backreaction_suite(const Selection& s, VerificationMode mode, Checks& out, Json& extra) {
  const BackreactionResidual r = lefloch_residual(*s.t2);
  const Metric limit = t2_limit(*s.t2);
  out.add("lefloch_difference_zero", check_zero(r.difference, sample_points(limit, kSamples), mode, 1e-12));
  double worst = 0;
  for (double R : {0.5, 1.0, 2.0}) {
    Bindings b = limit.defaults();
    b["Rhat"] = R;
    worst = std::max(worst, std::abs(eval(r.lhs, b) * R - 1.25));
  }
  out.add("lhs_times_radius", worst <= 1e-12, worst);
  extra["lhs"] = expr_string(r.lhs);
  extra["einstein_rr_over_lhs"] = expr_string(r.factor);
}

void kasner_vacuum_suite(const Selection& s, VerificationMode mode, Checks& out, Json& extra) {
  const Metric& g = s.g;
  const auto samples = sample_points(g, kSamples);
  const Curvature curv = compute_curvature(g);
  out.add("ricci_zero", all_zero(curv.ricci.components(), samples, mode));
  const AdmSlice slice = adm_split(g);
  out.add("hamiltonian_zero", check_zero(hamiltonian_residual(slice), samples, mode));
  const Expr n = Expr(static_cast<long>(g.dim() - 1));
  out.add("hubble_time", check_zero(simplify(Expr(-1) * n / slice.mean_curvature - Expr::symbol("t")), samples, mode));

  const CurvatureNorm norm(g, curv);
  std::vector<double> scaled;
  for (double t : {1.0, 10.0, 100.0}) {
    Bindings p = g.defaults();
    for (const auto& c : g.chart().coordinates()) p[c] = 0.0;
    p["t"] = t;
    scaled.push_back(t * t * norm(p));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const double spread = (*hi - *lo) / *hi;
  out.add("quadratic_curvature_decay", spread <= 1e-9, spread, Json{{"t2_norm", scaled}});
  extra["mean_curvature"] = expr_string(slice.mean_curvature);
}

void vacuum_suite(const Selection& s, VerificationMode mode, Checks& out, Json&) {
  const auto samples = sample_points(s.g, kSamples);
  const Curvature curv = compute_curvature(s.g);
  out.add("ricci_zero", all_zero(curv.ricci.components(), samples, mode));
  out.add("hamiltonian_zero", check_zero(hamiltonian_residual(adm_split(s.g)), samples, mode));
}

void kasner_pullback_suite(const Selection& s, VerificationMode mode, Checks& out, Json&) {
  const RescalingPlan plan = kasner_plan(*s.kasner, kDefaultTimes);
  const Metric pulled = rescaled_metric(s.g, plan);
  std::vector<Expr> renaming{Expr::symbol("u")};
  for (std::size_t k = 1; k < plan.limit_chart.dim(); ++k) renaming.push_back(Expr::symbol(plan.limit_chart.coordinate(k)));
  const Metric expected = pullback(s.g, plan.limit_chart, renaming);
  std::vector<Expr> diff;
  bool free_of_ti = true;
  for (std::size_t k = 0; k < pulled.components().size(); ++k) {
    diff.push_back(simplify(pulled.components()[k] - expected.components()[k]));
    free_of_ti = free_of_ti && !depends_on(pulled.components()[k], "ti");
  }
  out.add("pullback_equals_kasner", all_zero(diff, sample_points(expected, kSamples), mode));
  out.add_exact("independent_of_ti", free_of_ti);
}

void constraints_suite(const Selection& s, VerificationMode mode, Checks& out, Json& extra) {
  const Metric& g = s.g;
  const auto samples = sample_points(g, kSamples);
  const ConstraintReport r = constraint_report(g, mode, kSamples);
  out.add("gauss_consistency", r.find("gauss_mismatch")->zero);
  if (s.family == "minkowski" || s.family == "kasner") out.add("hamiltonian_zero", r.find("hamiltonian")->zero);
  if (s.family == "t2-limit" || s.family == "t2-limit-u") {
    const auto& rho = r.find("energy_density")->values;
    const double lowest = *std::min_element(rho.begin(), rho.end());
    out.add("energy_density_positive", lowest > 0, lowest);
  }
  extra["constraints"] = to_json(r);
}

struct Suite {
  std::string name;
  std::vector<std::string> families;  // first is the default
  std::function<void(const Selection&, VerificationMode, Checks&, Json&)> run;
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{
      {"erratum", {"t2-limit", "t2-limit-u"}, erratum_suite},
      {"backreaction", {"t2-limit", "t2-limit-u", "t2-model"}, backreaction_suite},
      {"kasner-vacuum", {"kasner"}, kasner_vacuum_suite},
      {"kasner-pullback", {"kasner"}, kasner_pullback_suite},
      {"vacuum", {"minkowski", "kasner", "t2-model", "t2-limit", "t2-limit-u", "file"}, vacuum_suite},
      {"constraints", {"kasner", "minkowski", "t2-limit", "t2-limit-u", "t2-model", "file"}, constraints_suite},
  };
  return all;
}

Json run_suite(const Suite& suite, const RunConfig& c, const std::string& family, bool& passed) {
  if (std::find(suite.families.begin(), suite.families.end(), family) == suite.families.end() &&
      !(std::find(kFamilies.begin(), kFamilies.end(), family) == kFamilies.end() &&
        std::find(suite.families.begin(), suite.families.end(), "file") != suite.families.end()))
    throw ConfigError("suite '" + suite.name + "' does not apply to metric '" + family + "'");
  // overrides for the other family are ignored when running every suite
  RunConfig local = c;
  if (family != "kasner") local.p.clear();
  if (!is_t2(family)) local.K = local.CU = local.Cinf = local.Lprofile = local.Gprofile = "";
  const Selection s = select_metric(local, family);
  Checks checks;
  Json extra = Json::object();
  suite.run(s, c.mode, checks, extra);
  passed = passed && checks.all_passed;
  Json j;
  j["suite"] = suite.name;
  j["passed"] = checks.all_passed;
  j["metric"] = metric_json(s);
  j["checks"] = checks.list;
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

Json verify(const RunConfig& c, bool& passed) {
  Json results = Json::array();
  if (c.suite == "all") {
    if (!c.metric.empty()) throw ConfigError("--metric cannot be combined with --suite all");
    for (const auto& s : suites()) results.push_back(run_suite(s, c, s.families.front(), passed));
    return results;
  }
  for (const auto& s : suites())
    if (s.name == c.suite) {
      results.push_back(run_suite(s, c, c.metric.empty() ? s.families.front() : c.metric, passed));
      return results;
    }
  throw ConfigError("unknown suite '" + c.suite + "'");
}

Json curvature(const RunConfig& c) {
  const Selection s = select_metric(c, c.metric.empty() ? "kasner" : c.metric);
  const Metric& g = s.g;
  const auto samples = sample_points(g, kSamples);
  const Curvature curv = compute_curvature(g);
  const Chart& chart = g.chart();
  const std::size_t n = g.dim();

  Json j;
  j["metric"] = metric_json(s);
  Json gamma = Json::object();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = b; d < n; ++d)
        if (!curv.christoffel(a, b, d).is_zero())
          gamma[chart.coordinate(a) + ";" + pair_name(chart, b, d)] = expr_string(curv.christoffel(a, b, d));
  j["christoffel"] = gamma;
  auto pairs = [&](const TensorField& t) {
    Json out = Json::object();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b)
        if (!t(a, b).is_zero()) out[pair_name(chart, a, b)] = expr_string(t(a, b));
    return out;
  };
  std::size_t riemann_nonzero = 0;
  for (const auto& e : curv.riemann_lowered.components()) riemann_nonzero += !e.is_zero();
  j["riemann_nonzero_components"] = riemann_nonzero;
  j["ricci"] = pairs(curv.ricci);
  j["scalar_curvature"] = expr_string(curv.scalar);
  j["einstein"] = pairs(curv.einstein);

  double ricci_max = 0;
  for (const auto& p : samples)
    for (const auto& e : curv.ricci.components()) ricci_max = std::max(ricci_max, std::abs(eval(e, p)));
  j["ricci_max_abs"] = ricci_max;
  const CurvatureNorm norm(g, curv);
  Json norms = Json::array();
  for (const auto& p : samples) norms.push_back(norm(p));
  j["curvature_norm_samples"] = norms;
  j["ricci_zero"] = to_json(all_zero(curv.ricci.components(), samples, c.mode));
  j["einstein_zero"] = to_json(all_zero(curv.einstein.components(), samples, c.mode));
  return j;
}

Json converge(const RunConfig& c) {
  const std::string family = c.metric.empty() ? "t2-model" : c.metric;
  if (family != "t2-model" && family != "kasner") throw ConfigError("converge supports --metric t2-model or kasner");
  const std::vector<double> times = c.ti.empty() ? kDefaultTimes : c.ti;
  if (times.size() < 4) throw ConfigError("converge needs at least 4 values of --ti");
  const Selection s = select_metric(c, family);
  RescalingPlan plan;
  Metric limit;
  if (family == "kasner") {
    plan = kasner_plan(*s.kasner, times);
    std::vector<Expr> renaming;
    for (const auto& name : plan.limit_chart.coordinates()) renaming.push_back(Expr::symbol(name));
    limit = pullback(s.g, plan.limit_chart, renaming);
  } else {
    plan = t2_plan(*s.t2, times);
    limit = t2_limit_u(*s.t2);
  }
  const ConvergenceReport r = convergence_study(s.g, limit, plan, c.grid, default_thread_count());
  if (!c.csv.empty()) {
    std::ofstream f(c.csv, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + c.csv);
    f << to_csv(r);
  }
  Json j;
  j["metric"] = metric_json(s);
  Json perturb = Json::array();
  for (const auto& p : c.perturb) perturb.push_back(p);
  j["perturbations"] = perturb;
  j["rescaling"] = to_string(plan.kind);
  j["convergence"] = to_json(r);
  return j;
}

void check_writable(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent)) throw ConfigError("output directory does not exist: " + parent.string());
}

void build_app(CLI::App& app, RunConfig& c, std::string& mode) {
  app.add_option("command", c.command, "curvature | verify | converge | report")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--metric", c.metric, "minkowski, kasner, t2-model, t2-limit, t2-limit-u, or a metric definition file");
  app.add_option("--p", c.p, "Kasner exponents, e.g. 2/3,2/3,-1/3");
  app.add_option("--K", c.K, "twist constant");
  app.add_option("--CU", c.CU, "asymptotic value of U");
  app.add_option("--Cinf", c.Cinf, "C_inf > 0");
  app.add_option("--Lprofile", c.Lprofile, "positive profile in theta");
  app.add_option("--Gprofile", c.Gprofile, "profile in theta");
  app.add_option("--perturb", c.perturb, "target:profile:exponent with target in eta, U, ainv, G, H (t2-model)");
  app.add_option("--ti", c.ti, "comma-separated basepoint times")->delimiter(',');
  app.add_option("--grid", c.grid, "grid points per axis")->check(CLI::Range(2, 101));
  app.add_option("--mode", mode, "symbolic | numeric | auto")->check(CLI::IsMember({"symbolic", "numeric", "auto"}));
  app.add_option("--suite", c.suite, "verify suite or 'all'");
  app.add_option("--out", c.out, "JSON report path (default stdout)");
  app.add_option("--csv", c.csv, "CSV path for converge");
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& s : suites()) out.push_back(s.name);
  return out;
}

std::optional<RunConfig> parse_command_line(int argc, const char* const* argv, std::string* help) {
  CLI::App app("Rescaling limits of expanding vacuum spacetimes", "einstein-limits");
  RunConfig c;
  std::string mode = "auto";
  build_app(app, c, mode);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    if (help) *help = app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  c.mode = parse_mode(mode);
  if (!c.ti.empty()) {
    for (std::size_t i = 1; i < c.ti.size(); ++i)
      if (!(c.ti[i] > c.ti[i - 1])) throw ConfigError("--ti values must be increasing");
    if (!(c.ti.front() > 0)) throw ConfigError("--ti values must be positive");
  }
  if (!c.csv.empty() && c.command != "converge") throw ConfigError("--csv only applies to converge");
  check_writable(c.out);
  check_writable(c.csv);
  return c;
}

Json run_report(const RunConfig& c, int& exit_code) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = c.command;
  j["mode"] = to_string(c.mode);
  bool passed = true;
  if (c.command == "curvature") {
    j["result"] = curvature(c);
  } else if (c.command == "verify") {
    j["suites"] = verify(c, passed);
  } else if (c.command == "converge") {
    j["result"] = converge(c);
  } else if (c.command == "report") {
    if (!c.metric.empty()) throw ConfigError("report runs fixed metrics; --metric is not accepted");
    RunConfig v = c;
    v.suite = "all";
    j["suites"] = verify(v, passed);
    RunConfig k = c;
    k.K = k.CU = k.Cinf = k.Lprofile = k.Gprofile = "";
    k.perturb.clear();
    k.metric = "kasner";
    RunConfig t = c;
    t.p.clear();
    t.metric = "t2-model";
    j["convergence"] = {{"t2-model", converge(t)}, {"kasner", converge(k)}};
  } else {
    throw ConfigError("unknown command '" + c.command + "'");
  }
  j["passed"] = passed;
  exit_code = passed ? kExitPass : kExitFailed;
  return j;
}

int run_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    std::string help;
    const auto config = parse_command_line(argc, argv, &help);
    if (!config) {
      out << help;
      return kExitPass;
    }
    int code = kExitPass;
    const std::string text = write_json(run_report(*config, code));
    if (config->out.empty()) {
      out << text;
    } else {
      std::ofstream f(config->out, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + config->out);
      f << text;
    }
    return code;
  } catch (const std::invalid_argument& e) {  // ConfigError, CatalogError, bad plans
    err << "einstein-limits: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "einstein-limits: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "einstein-limits: computation error: " << e.what() << "\n";
    return kExitComputation;
  }
}

}  // namespace elim
