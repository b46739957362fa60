// finslerlab command-line front end.
//
// Exit codes: 0 success (and expectations matched), 1 expectation mismatch,
// 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finslerlab/catalog.hpp"
#include "finslerlab/parallel.hpp"
#include "finslerlab/report.hpp"

using namespace finsler;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kConfigError = 2;

struct GridOptions {
  GridSpec spec;
  std::optional<double> r_min, r_max;

  void add(CLI::App* cmd) {
    cmd->add_option("--n-r", spec.n_r, "grid r-nodes")->check(CLI::PositiveNumber);
    cmd->add_option("--n-s", spec.n_s, "grid s-nodes per r")->check(CLI::Range(2, 100000));
    cmd->add_option("--sigma-max", spec.sigma_max, "largest |s|/r")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--sigma-min", spec.sigma_min, "smallest |s|/r")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--r-min", r_min, "lower end of the grid r-range");
    cmd->add_option("--r-max", r_max, "upper end of the grid r-range");
  }

  GridSpec resolve() const {
    GridSpec g = spec;
    if (r_min) g.r_min = r_min;
    if (r_max) g.r_max = r_max;
    return g;
  }
};

struct TolOptions {
  std::optional<double> scalar, constant, spread, douglas, flat;

  void add(CLI::App* cmd) {
    auto floor = CLI::Range(kMinTolerance, 1e300);
    cmd->add_option("--tol-scalar", scalar, "scalar flag tolerance on max|R2|")->check(floor);
    cmd->add_option("--tol-const", constant, "constant flag tolerance on max|R3|")->check(floor);
    cmd->add_option("--tol-spread", spread, "tolerance on the K spread")->check(floor);
    cmd->add_option("--tol-douglas", douglas, "Douglas fit tolerance")->check(floor);
    cmd->add_option("--tol-flat", flat, "projective flatness tolerance")->check(floor);
  }

  Tolerances resolve(Provenance p) const {
    Tolerances t = Tolerances::for_provenance(p);
    if (scalar) t.scalar = *scalar;
    if (constant) t.constant = *constant;
    if (spread) t.K_spread = *spread;
    if (douglas) t.douglas = *douglas;
    if (flat) t.flat = *flat;
    return t;
  }
};

// Entry parameters come as --param name=value or directly as --name value.
Params collect_params(const std::string& id, const std::vector<std::string>& pairs,
                      const std::vector<std::string>& extras) {
  const EntryDescriptor& d = describe_entry(id);
  auto known = [&](const std::string& name) {
    for (const auto& p : d.params)
      if (p.name == name) return true;
    return false;
  };
  Params out;
  auto put = [&](const std::string& name, const std::string& value) {
    if (!known(name)) throw Error(ErrorCode::InvalidConfig, "unknown option --" + name + " for " + id);
    out[name] = parse_param_value(value);
  };
  for (const auto& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--param expects name=value, got '" + kv + "'");
    put(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0) throw Error(ErrorCode::InvalidConfig, "unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      put(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw Error(ErrorCode::InvalidConfig, "option " + a + " needs a value");
      put(a.substr(2), extras[++i]);
    }
  }
  return out;
}

CatalogEntry load_entry(const std::string& id, const Params& params, const std::string& build) {
  if (build == "quadrature") return get_entry_quadrature(id, params);
  return get_entry(id, params);
}

// 1e-06 -> 1e-6
std::string short_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string s = buf;
  const auto e = s.find("e-0");
  if (e != std::string::npos) s.erase(e + 2, 1);
  const auto p = s.find("e+0");
  if (p != std::string::npos) s.erase(p + 1, 2);
  return s;
}

void print_summary(std::ostream& os, const ClassificationReport& rep) {
  os << rep.name << ":";
  bool first = true;
  for (const auto& v : rep.verdicts) {
    os << (first ? " " : ", ") << v.name << " " << to_string(v.status);
    first = false;
  }
  os << "\n";
  char buf[128];
  if (rep.verdict("constant_flag").status == Status::Pass) {
    std::snprintf(buf, sizeof buf, "constant K: mean=%.6f spread<%s", rep.K.mean, short_sci(rep.tolerances.K_spread).c_str());
  } else {
    std::snprintf(buf, sizeof buf, "K: mean=%.6f spread=%.3g max|R2|=%.3g max|R3|=%.3g", rep.K.mean, rep.K.spread,
                  rep.max_R2, rep.max_R3);
  }
  os << buf << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  f << text;
}

int finish_classification(const ClassificationReport& rep, const GridSpec& grid,
                          const std::optional<ExpectationCheck>& check, const std::string& output) {
  const std::string json = dump_json(report_to_json(rep, grid, check)) + "\n";
  if (output == "-") {
    std::cout << json;
  } else {
    write_text(output, json);
  }
  std::ostream& os = output == "-" ? std::cerr : std::cout;
  print_summary(os, rep);
  if (check) {
    if (check->all_matched) {
      os << "expectations: matched\n";
    } else {
      os << "expectations: " << check->mismatches.size() << " mismatch(es)\n";
      for (const auto& m : check->mismatches) os << "  " << m << "\n";
    }
  }
  if (output != "-") os << "report: " << output << "\n";
  return check && !check->all_matched ? kMismatch : kOk;
}

double quantity(const std::string& q, const MetricProfile& prof, const RsPoint& at) {
  if (q == "phi") return prof.phi_value(at);
  if (q == "Q") return compute_Q(prof, at).value();
  if (q == "R2") return compute_R2(compute_Q(prof, at), at);
  const double nan = std::nan("");
  const auto c = curvature_sample(prof, at);
  if (q == "P") return c.P.value_or(nan);
  if (q == "R1") return c.R1.value_or(nan);
  if (q == "R3") return c.R3.value_or(nan);
  if (q == "R4") return c.R4.value_or(nan);
  return c.K.value_or(nan);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finslerlab: curvature and classification of spherically symmetric Finsler metrics"};
  app.require_subcommand(1);

  auto* catalog = app.add_subcommand("catalog", "catalog operations");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "print the entry manifest");
  std::string list_format = "json";
  list->add_option("--format", list_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* cls = app.add_subcommand("classify", "classify a catalog entry");
  std::string cls_entry, cls_build = "closed", cls_output;
  std::vector<std::string> cls_params;
  GridOptions cls_grid;
  TolOptions cls_tol;
  cls->add_option("entry", cls_entry, "catalog entry id")->required();
  cls->add_option("--param", cls_params, "entry parameter name=value (or pass --name value)");
  cls->add_option("--build", cls_build, "closed or quadrature")->check(CLI::IsMember({"closed", "quadrature"}));
  cls->add_option("-o,--output", cls_output, "report path, '-' for stdout (default <entry>.report.json)");
  cls_grid.add(cls);
  cls_tol.add(cls);
  cls->allow_extras();

  auto* geo = app.add_subcommand("geodesic", "integrate a geodesic and measure straightness");
  std::string geo_entry, geo_output;
  std::vector<std::string> geo_params;
  std::vector<double> x0, y0;
  double t_end = 1.0, step = 1e-3;
  geo->add_option("entry", geo_entry, "catalog entry id")->required();
  geo->add_option("--param", geo_params, "entry parameter name=value");
  geo->add_option("--x0", x0, "start point, comma separated")->required()->delimiter(',');
  geo->add_option("--y0", y0, "start velocity, comma separated")->required()->delimiter(',');
  geo->add_option("--t-end", t_end, "final time")->check(CLI::PositiveNumber);
  geo->add_option("--step", step, "RK4 step")->check(CLI::PositiveNumber);
  geo->add_option("-o,--output", geo_output, "trajectory CSV path (default stdout)");
  geo->allow_extras();

  auto* fam = app.add_subcommand("family", "build a family member from a JSON config and classify it");
  std::string fam_config, fam_output;
  fam->add_option("config", fam_config, "family config (JSON)")->required();
  fam->add_option("-o,--output", fam_output, "report path, '-' for stdout (default <name>.report.json)");

  auto* dump = app.add_subcommand("grid-dump", "CSV of one quantity over the verification grid");
  std::string dump_entry, dump_quantity, dump_build = "closed", dump_output;
  std::vector<std::string> dump_params;
  GridOptions dump_grid;
  dump->add_option("entry", dump_entry, "catalog entry id")->required();
  dump->add_option("quantity", dump_quantity, "phi, Q, P, R1, R2, R3, R4 or K")
      ->required()
      ->check(CLI::IsMember({"phi", "Q", "P", "R1", "R2", "R3", "R4", "K"}));
  dump->add_option("--param", dump_params, "entry parameter name=value");
  dump->add_option("--build", dump_build, "closed or quadrature")->check(CLI::IsMember({"closed", "quadrature"}));
  dump->add_option("-o,--output", dump_output, "CSV path (default stdout)");
  dump_grid.add(dump);
  dump->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    if (list->parsed()) {
      if (list_format == "csv")
        std::cout << manifest_csv();
      else
        std::cout << dump_json(manifest_json()) << "\n";
      return kOk;
    }

    if (cls->parsed()) {
      const Params params = collect_params(cls_entry, cls_params, cls->remaining());
      const CatalogEntry entry = load_entry(cls_entry, params, cls_build);
      const GridSpec gs = cls_grid.resolve();
      const auto grid = default_grid(entry.profile.domain(), gs);
      const Tolerances tol = cls_tol.resolve(entry.profile.provenance());
      const auto rep = classify(entry.profile, grid, tol);
      const auto check = check_expectations(entry, rep, std::max(1e-6, tol.K_spread));
      return finish_classification(rep, gs, check, cls_output.empty() ? cls_entry + ".report.json" : cls_output);
    }

    if (geo->parsed()) {
      const Params params = collect_params(geo_entry, geo_params, geo->remaining());
      const CatalogEntry entry = get_entry(geo_entry, params);
      if (x0.size() != y0.size() || x0.size() < 2)
        throw Error(ErrorCode::InvalidConfig, "--x0 and --y0 need the same dimension (at least 2)");
      const auto res = integrate_geodesic(entry.profile, x0, y0, t_end, step);
      const double dev = straightness_deviation(res.states);
      std::ostream* summary = &std::cerr;
      std::ofstream file;
      if (geo_output.empty()) {
        write_trajectory_csv(std::cout, res);
      } else {
        file.open(geo_output, std::ios::binary);
        if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write " + geo_output);
        write_trajectory_csv(file, res);
        summary = &std::cout;
      }
      *summary << "straightness deviation: " << format_double(dev) << "\n";
      *summary << "error estimate: " << format_double(res.error_estimate) << "\n";
      if (res.exited) *summary << "exited: " << res.exit_reason << "\n";
      return kOk;
    }

    if (fam->parsed()) {
      std::ifstream in(fam_config);
      if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + fam_config);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
      }
      const FamilyConfig cfg = parse_family_config(j);
      const MetricProfile prof = build_from_config(cfg);
      const auto grid = default_grid(prof.domain(), cfg.grid);
      const auto rep = classify(prof, grid, cfg.tolerances);
      std::optional<ExpectationCheck> check;
      if (!cfg.expect.empty()) {
        CatalogEntry pseudo{cfg.spec.name, "", prof, cfg.expect, std::nullopt};
        check = check_expectations(pseudo, rep);
      }
      return finish_classification(rep, cfg.grid, check,
                                   fam_output.empty() ? cfg.spec.name + ".report.json" : fam_output);
    }

    if (dump->parsed()) {
      const Params params = collect_params(dump_entry, dump_params, dump->remaining());
      const CatalogEntry entry = load_entry(dump_entry, params, dump_build);
      const auto grid = default_grid(entry.profile.domain(), dump_grid.resolve());
      std::vector<double> values(grid.size());
      parallel_for(grid.size(), [&](std::size_t i) {
        // Points where the quantity is undefined (phi <= 0, singular spray) print as nan.
        try {
          values[i] = quantity(dump_quantity, entry.profile, grid[i]);
        } catch (const Error&) {
          values[i] = std::nan("");
        }
      });
      std::ostringstream os;
      os << "r,s," << dump_quantity << "\n";
      for (std::size_t i = 0; i < grid.size(); ++i)
        os << format_double(grid[i].r) << ',' << format_double(grid[i].s) << ',' << format_double(values[i]) << "\n";
      if (dump_output.empty())
        std::cout << os.str();
      else
        write_text(dump_output, os.str());
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
