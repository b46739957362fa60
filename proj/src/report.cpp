#include "finslerlab/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace finsler {

namespace {

void dump_rec(const ojson& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += ojson(it.key()).dump();
        out += sep;
        dump_rec(it.value(), indent, depth + 1, out);
      }
      out += close + '}';
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        dump_rec(v, indent, depth + 1, out);
      }
      out += close + ']';
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      // JSON has no NaN or infinity.
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

ojson verdict_json(const Verdict& v) {
  ojson j;
  j["name"] = v.name;
  j["status"] = std::string(to_string(v.status));
  j["residual"] = v.residual;
  j["tolerance"] = v.tolerance;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw Error(ErrorCode::InvalidConfig, "unknown key '" + it.key() + "' in " + where);
}

double number_at(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " in " + where + " must be a number");
  return v.get<double>();
}

std::string string_at(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " in " + where + " must be a string");
  return v.get<std::string>();
}

GFunction parse_g(const nlohmann::json& j) {
  if (j.is_string()) return make_g(j.get<std::string>());
  reject_unknown(j, {"name", "c"}, "g");
  return make_g(string_at(j, "name", "g"), j.contains("c") ? number_at(j, "c", "g") : 0.0);
}

HFunction parse_h(const nlohmann::json& j) {
  if (j.is_string()) return make_h(j.get<std::string>());
  reject_unknown(j, {"name", "c"}, "h");
  return make_h(string_at(j, "name", "h"), j.contains("c") ? number_at(j, "c", "h") : 1.0);
}

EtaFunction parse_eta(const nlohmann::json& j) {
  if (j.is_string()) return make_eta(j.get<std::string>());
  reject_unknown(j, {"name", "m", "eps", "gamma", "c", "coeffs"}, "eta");
  const std::string name = string_at(j, "name", "eta");
  if (name == "polynomial") {
    EtaFunction e;
    e.name = name;
    if (!j.contains("coeffs") || !j.at("coeffs").is_array())
      throw Error(ErrorCode::InvalidConfig, "polynomial eta needs a coeffs array");
    for (const auto& c : j.at("coeffs")) {
      if (!c.is_number()) throw Error(ErrorCode::InvalidConfig, "eta coeffs must be numbers");
      e.coeffs.push_back(c.get<double>());
    }
    return e;
  }
  const double m = j.contains("m") ? number_at(j, "m", "eta") : 1.0;
  if (m != std::floor(m) || m < 0) throw Error(ErrorCode::InvalidConfig, "eta m must be a non-negative integer");
  return make_eta(name, static_cast<int>(m), j.contains("eps") ? number_at(j, "eps", "eta") : 1.0,
                  j.contains("gamma") ? number_at(j, "gamma", "eta") : 1.0,
                  j.contains("c") ? number_at(j, "c", "eta") : 1.0);
}

Params parse_params(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "params must be an object");
  Params p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_number())
      p[it.key()] = it.value().get<double>();
    else if (it.value().is_string())
      p[it.key()] = it.value().get<std::string>();
    else
      throw Error(ErrorCode::InvalidConfig, "param '" + it.key() + "' must be a number or a string");
  }
  return p;
}

double tolerance_at(const nlohmann::json& j, const char* key) {
  const double v = number_at(j, key, "tolerances");
  if (!(v >= kMinTolerance)) throw Error(ErrorCode::InvalidConfig, std::string("tolerance ") + key + " below 1e-14");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string dump_json(const ojson& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  return out;
}

ojson params_to_json(const Params& p) {
  ojson j = ojson::object();
  for (const auto& [k, v] : p) {
    if (const double* d = std::get_if<double>(&v))
      j[k] = *d;
    else
      j[k] = std::get<std::string>(v);
  }
  return j;
}

ojson report_to_json(const ClassificationReport& rep, const GridSpec& grid,
                     const std::optional<ExpectationCheck>& expectations) {
  ojson j;
  j["schema"] = 1;
  j["name"] = rep.name;
  j["params"] = params_to_json(rep.params);
  j["provenance"] = rep.provenance == Provenance::ClosedForm ? "closed_form" : "quadrature";
  ojson g;
  g["description"] = rep.grid_description;
  g["points"] = rep.grid_points;
  g["n_r"] = grid.n_r;
  g["n_s"] = grid.n_s;
  g["sigma_max"] = grid.sigma_max;
  g["sigma_min"] = grid.sigma_min;
  if (grid.r_min) g["r_min"] = *grid.r_min;
  if (grid.r_max) g["r_max"] = *grid.r_max;
  g["skipped_points"] = rep.skipped_points;
  j["grid"] = g;
  ojson tol;
  tol["scalar"] = rep.tolerances.scalar;
  tol["constant"] = rep.tolerances.constant;
  tol["K_spread"] = rep.tolerances.K_spread;
  tol["douglas"] = rep.tolerances.douglas;
  tol["flat"] = rep.tolerances.flat;
  j["tolerances"] = tol;
  ojson verdicts = ojson::array();
  for (const auto& v : rep.verdicts) verdicts.push_back(verdict_json(v));
  j["verdicts"] = verdicts;
  ojson res;
  res["max_R2"] = rep.max_R2;
  res["max_R3"] = rep.max_R3;
  res["douglas"] = rep.douglas_residual;
  res["max_g_hat"] = rep.max_g_hat;
  res["max_f_hat"] = rep.max_f_hat;
  ojson pos;
  pos["points"] = rep.positivity.points;
  pos["min_m0"] = rep.positivity.min_m0;
  pos["min_m1"] = rep.positivity.min_m1;
  pos["min_m2"] = rep.positivity.min_m2;
  pos["violations"] = rep.positivity.violations.size();
  res["positivity"] = pos;
  j["residuals"] = res;
  ojson K;
  K["mean"] = rep.K.mean;
  K["spread"] = rep.K.spread;
  K["min"] = rep.K.min;
  K["max"] = rep.K.max;
  K["points"] = rep.K.points;
  j["K"] = K;
  if (expectations) {
    ojson e;
    e["matched"] = expectations->all_matched;
    e["mismatches"] = expectations->mismatches;
    j["expectations"] = e;
  }
  return j;
}

ojson manifest_json() {
  ojson arr = ojson::array();
  for (const auto& d : list_entries()) {
    ojson e;
    e["id"] = d.id;
    e["summary"] = d.summary;
    e["anchor"] = d.anchor;
    e["domain"] = d.domain;
    ojson ps = ojson::array();
    for (const auto& p : d.params) {
      ojson q;
      q["name"] = p.name;
      if (const double* v = std::get_if<double>(&p.fallback))
        q["default"] = *v;
      else
        q["default"] = std::get<std::string>(p.fallback);
      q["description"] = p.description;
      if (!p.choices.empty()) q["choices"] = p.choices;
      if (p.min) q["min"] = *p.min;
      if (p.max) q["max"] = *p.max;
      ps.push_back(q);
    }
    e["params"] = ps;
    arr.push_back(e);
  }
  return arr;
}

std::string manifest_csv() {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "id,params,domain,anchor\n";
  for (const auto& d : list_entries()) {
    std::string ps;
    for (const auto& p : d.params) {
      if (!ps.empty()) ps += ';';
      ps += p.name + "=";
      if (const double* v = std::get_if<double>(&p.fallback))
        ps += format_double(*v);
      else
        ps += std::get<std::string>(p.fallback);
    }
    os << d.id << ',' << quote(ps) << ',' << quote(d.domain) << ',' << quote(d.anchor) << '\n';
  }
  return os.str();
}

ParamValue parse_param_value(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const char* begin = text.data() + (!text.empty() && text[0] == '+' ? 1 : 0);
  const auto res = std::from_chars(begin, end, v);
  if (res.ec == std::errc() && res.ptr == end && !text.empty()) return v;
  return text;
}

Status parse_status(const std::string& s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "inconclusive") return Status::Inconclusive;
  throw Error(ErrorCode::InvalidConfig, "unknown verdict status '" + s + "'");
}

FamilyConfig parse_family_config(const nlohmann::json& j) {
  reject_unknown(j,
                 {"kind", "name", "g", "k", "h", "eta", "r_min", "r_max", "r0", "s0_fraction", "quadrature_tol",
                  "transform", "T_at_r0", "Tbar_at_r0", "spray", "gauge", "grid", "tolerances", "expect"},
                 "family config");
  FamilyConfig cfg;
  FamilySpec& s = cfg.spec;
  if (j.contains("kind")) cfg.kind = string_at(j, "kind", "family config");
  if (cfg.kind == "theorem1")
    s.kind = FamilyKind::Theorem1;
  else if (cfg.kind == "theorem2" || cfg.kind == "theorem3")
    s.kind = FamilyKind::Theorem2;
  else
    throw Error(ErrorCode::InvalidConfig, "kind must be theorem1, theorem2 or theorem3");
  s.name = j.contains("name") ? string_at(j, "name", "family config") : cfg.kind;
  if (j.contains("g")) s.g = parse_g(j.at("g"));
  if (j.contains("k")) s.k = number_at(j, "k", "family config");
  if (j.contains("h")) s.h = parse_h(j.at("h"));
  if (j.contains("eta")) s.eta = parse_eta(j.at("eta"));
  if (j.contains("r_min")) s.r_min = number_at(j, "r_min", "family config");
  if (j.contains("r_max")) s.r_max = number_at(j, "r_max", "family config");
  if (!(s.r_min >= 0.0 && s.r_max > s.r_min)) throw Error(ErrorCode::InvalidConfig, "need 0 <= r_min < r_max");
  if (j.contains("r0")) s.r0 = number_at(j, "r0", "family config");
  if (j.contains("s0_fraction")) s.s0_fraction = number_at(j, "s0_fraction", "family config");
  if (!(s.s0_fraction > 0.0 && s.s0_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "s0_fraction must lie in (0, 1)");
  if (j.contains("quadrature_tol")) s.quadrature_tol = number_at(j, "quadrature_tol", "family config");
  if (!(s.quadrature_tol >= kMinTolerance)) throw Error(ErrorCode::InvalidConfig, "quadrature_tol below 1e-14");
  if (j.contains("transform")) {
    const std::string t = string_at(j, "transform", "family config");
    if (t == "closed")
      s.transform = TransformMode::ClosedForm;
    else if (t == "quadrature")
      s.transform = TransformMode::Quadrature;
    else
      throw Error(ErrorCode::InvalidConfig, "transform must be closed or quadrature");
  }
  if (j.contains("T_at_r0")) s.T_at_r0 = number_at(j, "T_at_r0", "family config");
  if (j.contains("Tbar_at_r0")) s.Tbar_at_r0 = number_at(j, "Tbar_at_r0", "family config");
  if (j.contains("gauge")) {
    if (cfg.kind == "theorem3") throw Error(ErrorCode::InvalidConfig, "gauge is not used by theorem3");
    const auto& ga = j.at("gauge");
    reject_unknown(ga, {"entry", "params"}, "gauge");
    cfg.gauge_entry = string_at(ga, "entry", "gauge");
    if (ga.contains("params")) cfg.gauge_params = parse_params(ga.at("params"));
  }
  if (j.contains("spray")) {
    if (cfg.kind != "theorem3") throw Error(ErrorCode::InvalidConfig, "spray is only used by theorem3");
    const auto& sp = j.at("spray");
    reject_unknown(sp, {"entry", "params"}, "spray");
    cfg.spray_entry = string_at(sp, "entry", "spray");
    if (sp.contains("params")) cfg.spray_params = parse_params(sp.at("params"));
  } else if (cfg.kind == "theorem3") {
    throw Error(ErrorCode::InvalidConfig, "theorem3 needs a spray entry");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, {"n_r", "n_s", "sigma_max", "sigma_min", "r_min", "r_max"}, "grid");
    if (g.contains("n_r")) cfg.grid.n_r = static_cast<int>(number_at(g, "n_r", "grid"));
    if (g.contains("n_s")) cfg.grid.n_s = static_cast<int>(number_at(g, "n_s", "grid"));
    if (g.contains("sigma_max")) cfg.grid.sigma_max = number_at(g, "sigma_max", "grid");
    if (g.contains("sigma_min")) cfg.grid.sigma_min = number_at(g, "sigma_min", "grid");
    if (g.contains("r_min")) cfg.grid.r_min = number_at(g, "r_min", "grid");
    if (g.contains("r_max")) cfg.grid.r_max = number_at(g, "r_max", "grid");
    if (cfg.grid.n_r < 1 || cfg.grid.n_s < 2) throw Error(ErrorCode::InvalidConfig, "grid needs n_r >= 1, n_s >= 2");
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    reject_unknown(t, {"scalar", "constant", "K_spread", "douglas", "flat"}, "tolerances");
    Tolerances tol = Tolerances::for_provenance(Provenance::Quadrature);
    if (t.contains("scalar")) tol.scalar = tolerance_at(t, "scalar");
    if (t.contains("constant")) tol.constant = tolerance_at(t, "constant");
    if (t.contains("K_spread")) tol.K_spread = tolerance_at(t, "K_spread");
    if (t.contains("douglas")) tol.douglas = tolerance_at(t, "douglas");
    if (t.contains("flat")) tol.flat = tolerance_at(t, "flat");
    cfg.tolerances = tol;
  }
  if (j.contains("expect")) {
    const auto& e = j.at("expect");
    reject_unknown(e, {"finsler_positive", "douglas", "scalar_flag", "constant_flag", "projectively_flat"}, "expect");
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (!it.value().is_string()) throw Error(ErrorCode::InvalidConfig, "expect values must be strings");
      cfg.expect.emplace_back(it.key(), parse_status(it.value().get<std::string>()));
    }
  }
  return cfg;
}

MetricProfile build_from_config(const FamilyConfig& cfg) {
  if (cfg.kind != "theorem3") {
    MetricProfile built = cfg.kind == "theorem1" ? build_theorem1_profile(cfg.spec) : build_theorem2_profile(cfg.spec);
    if (!cfg.gauge_entry) return built;
    return match_gauge(built, get_entry(*cfg.gauge_entry, cfg.gauge_params).profile, cfg.spec.s0_fraction);
  }
  const MetricProfile p = get_entry(*cfg.spray_entry, cfg.spray_params).profile;
  Theorem3Options opt;
  opt.quadrature_tol = cfg.spec.quadrature_tol;
  opt.r_base = cfg.spec.r0;
  return build_theorem3_profile(p, cfg.spec.g, DomainSpec{cfg.spec.r_min, cfg.spec.r_max, {}}, opt);
}

}  // namespace finsler
