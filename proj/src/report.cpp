#include "einstein_limits/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace elim {

namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_value(std::string& out, const Json& j, int indent) {
  const std::string pad(indent * 2, ' ');
  const std::string inner((indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(key).dump() + ": ";
        write_value(out, value, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_value(out, j[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string write_json(const Json& j) {
  std::string out;
  write_value(out, j, 0);
  out += "\n";
  return out;
}

std::string expr_string(const Expr& e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

Json to_json(const ZeroCheck& z) {
  Json j;
  j["passed"] = z.passed;
  j["mode"] = to_string(z.path);
  j["residual"] = z.residual;
  j["nodes"] = z.nodes;
  return j;
}

Json to_json(const Metric& g) {
  Json j;
  j["coordinates"] = g.chart().coordinates();
  j["signature"] = g.signature() == Signature::Lorentzian ? "lorentzian" : "riemannian";
  Json params = Json::object();
  for (const auto& name : g.parameters()) {
    const auto it = g.defaults().find(name);
    params[name] = it == g.defaults().end() ? Json(nullptr) : Json(it->second);
  }
  j["parameters"] = params;
  Json comps = Json::object();
  const std::size_t n = g.dim();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      if (!g(a, b).is_zero())
        comps[g.chart().coordinate(a) + "," + g.chart().coordinate(b)] = expr_string(g(a, b));
  j["components"] = comps;
  return j;
}

Json to_json(const LinearFit& f) {
  Json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["slope_ci95"] = {f.slope_low, f.slope_high};
  j["residuals"] = f.residuals;
  return j;
}

Json to_json(const ConvergenceReport& r) {
  Json j;
  Json box = Json::array();
  for (const auto& range : r.grid.box) box.push_back({range.lo, range.hi});
  j["grid"] = {{"points_per_axis", r.grid.points_per_axis}, {"nodes", r.grid.size()}, {"box", box}};
  j["symbolic_pullback"] = r.symbolic_pullback;
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back({{"t_i", p.ti}, {"j", p.j}, {"sup_distance", p.sup_distance}});
  j["points"] = pts;
  j["fit"] = r.fit ? to_json(*r.fit) : Json(nullptr);
  return j;
}

Json to_json(const ConstraintReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json c;
    c["name"] = e.name;
    c["expr"] = expr_string(e.expr);
    c["zero"] = to_json(e.zero);
    c["values"] = e.values;
    entries.push_back(c);
  }
  return {{"samples", r.samples.size()}, {"entries", entries}};
}

Json to_json(const TraceReport& r) {
  Json j;
  j["trace"] = expr_string(r.trace);
  j["scalar_curvature"] = expr_string(r.scalar);
  j["trace_zero"] = to_json(r.trace_zero);
  j["scalar_zero"] = to_json(r.scalar_zero);
  Json nz = Json::array();
  for (const auto& c : r.nonzero) nz.push_back({{"a", c.a}, {"b", c.b}, {"value", expr_string(c.value)}});
  j["nonzero_frame_components"] = nz;
  return j;
}

}  // namespace elim
