#pragma once

// JSON and CSV output shared by the CLI and the Python module, plus the
// family config format.

#include <optional>
#include <string>

#include "finslerlab/catalog.hpp"
#include "finslerlab/families.hpp"
#include "json.hpp"

namespace finsler {

using ojson = nlohmann::ordered_json;

// Serializes with fixed key order and every float at 17 significant digits.
std::string dump_json(const ojson& j, int indent = 2);

ojson params_to_json(const Params& p);
ojson report_to_json(const ClassificationReport& rep, const GridSpec& grid,
                     const std::optional<ExpectationCheck>& expectations = std::nullopt);

ojson manifest_json();
std::string manifest_csv();

// Entry parameter from a command-line string: a number when the whole string
// parses as one, otherwise a choice.
ParamValue parse_param_value(const std::string& text);

// %.17g without locale dependence.
std::string format_double(double v);

// Family config file:
//   {"kind": "theorem1" | "theorem2" | "theorem3", "name": ...,
//    "g": "inv_r_neg" | {"name": "const", "c": 0.1}, "k": 1,
//    "h": "zero" | {"name": ..., "c": ...},
//    "eta": "sqrt" | {"name": ..., "m", "eps", "gamma", "c", "coeffs"},
//    "r_min", "r_max", "r0", "s0_fraction", "quadrature_tol",
//    "transform": "closed" | "quadrature",
//    "T_at_r0", "Tbar_at_r0",                          (quadrature transforms)
//    "spray": {"entry": id, "params": {...}}          (theorem3 only)
//    "gauge": {"entry": id, "params": {...}}          (theorem1/2: h matched to
//                                                      the entry on s = s0(r))
//    "grid": {"n_r", "n_s", "sigma_max", "sigma_min", "r_min", "r_max"},
//    "tolerances": {"scalar", "constant", "K_spread", "douglas", "flat"},
//    "expect": {"douglas": "pass", ...}}
// Unknown keys are rejected with InvalidConfig.
struct FamilyConfig {
  std::string kind = "theorem2";
  FamilySpec spec;
  std::optional<std::string> spray_entry;
  Params spray_params;
  std::optional<std::string> gauge_entry;
  Params gauge_params;
  GridSpec grid;
  std::optional<Tolerances> tolerances;
  std::vector<std::pair<std::string, Status>> expect;
};

FamilyConfig parse_family_config(const nlohmann::json& j);
MetricProfile build_from_config(const FamilyConfig& cfg);

// Tolerance overrides below this are refused.
inline constexpr double kMinTolerance = 1e-14;
Status parse_status(const std::string& s);

}  // namespace finsler
