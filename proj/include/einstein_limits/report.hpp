#pragma once

#include <string>

#include <json.hpp>

#include "einstein_limits/adm.hpp"
#include "einstein_limits/geometry.hpp"
#include "einstein_limits/rescaling.hpp"

namespace elim {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

/// Serializes with two-space indentation, keys in insertion order and
/// floating-point numbers printed with 17 significant digits. Non-finite
/// numbers become null.
std::string write_json(const Json& j);

std::string expr_string(const Expr& e);

Json to_json(const ZeroCheck& z);
Json to_json(const Metric& g);
Json to_json(const LinearFit& f);
Json to_json(const ConvergenceReport& r);
Json to_json(const ConstraintReport& r);
Json to_json(const TraceReport& r);

}  // namespace elim
