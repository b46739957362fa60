// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"

using namespace finsler;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Outcome require(Outcome o, bool cond, const std::string& what) {
  if (!cond) {
    o.ok = false;
    o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
  return o;
}

struct Residuals {
  double K_dev = 0.0;
  double K_mean = 0.0;
  double R2 = 0.0;
  double R3 = 0.0;
};

Residuals constant_residuals(const MetricProfile& prof, double K_want, const GridSpec& gs = {}) {
  Residuals out;
  const auto grid = default_grid(prof.domain(), gs);
  double sum = 0.0;
  for (const RsPoint& at : grid) {
    const SprayData sd = compute_spray(prof, at);
    const double K = compute_R1(sd).value() / (sd.phi.value() * sd.phi.value());
    sum += K;
    out.K_dev = std::max(out.K_dev, std::abs(K - K_want));
    out.R2 = std::max(out.R2, std::abs(compute_R2(sd)));
    out.R3 = std::max(out.R3, std::abs(compute_R3(sd)));
  }
  out.K_mean = sum / static_cast<double>(grid.size());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome constant_entry(const std::string& id, double K_want) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = constant_residuals(get_entry(id, {{"c", 1.0}}).profile, K_want);
  const double secs = seconds_since(t0);
  Outcome o{true, "mean K=" + fmt(res.K_mean) + " max|K-K0|=" + fmt(res.K_dev) + " max|R2|=" + fmt(res.R2) +
                      " max|R3|=" + fmt(res.R3) + " " + fmt(secs) + "s"};
  o = require(o, std::abs(res.K_mean - K_want) < 1e-6, "mean K off");
  o = require(o, res.K_dev < 1e-6, "pointwise K off");
  o = require(o, res.R2 < 1e-6 && res.R3 < 1e-6, "R2/R3 too large");
  return require(o, secs < 5.0, "runtime");
}

Outcome criterion3(std::uint64_t seed) {
  GridSpec gs;
  gs.r_min = 0.05;
  gs.r_max = 0.9;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.1, 0.5), unit(-1.0, 1.0);
  double worst_K = 0.0, worst_dev = 0.0;
  int exited = 0;
  for (double sign : {1.0, -1.0}) {
    const auto prof = get_entry("berwald", {{"sign", sign}}).profile;
    worst_K = std::max(worst_K, constant_residuals(prof, 0.0, gs).K_dev);
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x = oracle::random_vec(rng, -1.0, 1.0), y = oracle::random_vec(rng, -1.0, 1.0);
      const double nx = oracle::norm(x), ny = oracle::norm(y), rad = radius(rng);
      for (double& v : x) v *= rad / nx;
      for (double& v : y) v /= ny;
      const auto res = integrate_geodesic(prof, x, y, 0.3, 1e-3);
      if (res.exited) ++exited;
      worst_dev = std::max(worst_dev, straightness_deviation(res.states));
    }
  }
  Outcome o{true, "max|K|=" + fmt(worst_K) + " max deviation=" + fmt(worst_dev) + " over 40 geodesics"};
  o = require(o, worst_K < 1e-6, "K not flat");
  o = require(o, exited == 0, std::to_string(exited) + " geodesics left the domain");
  return require(o, worst_dev < 1e-6, "geodesics bend");
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, Params>> suite = {
      {"ex001", {}},       {"erf_family", {{"m", 0.0}}}, {"erf_family", {{"m", 1.0}}},
      {"erf_family", {{"m", 2.0}}}, {"artanh_m0", {}},  {"corn1", {}},
      {"corn2", {{"g", std::string("half")}}},            {"exs1", {}},
      {"g_minus2", {}}};
  Outcome o;
  double worst = 0.0;
  std::string worst_id;
  for (const auto& [id, params] : suite) {
    const auto entry = get_entry(id, params);
    const double bound = entry.profile.provenance() == Provenance::ClosedForm ? 1e-6 : 1e-3;
    double r2 = 0.0;
    for (const RsPoint& at : default_grid(entry.profile.domain()))
      r2 = std::max(r2, std::abs(compute_R2(compute_Q(entry.profile, at), at)));
    if (r2 / bound > worst) {
      worst = r2 / bound;
      worst_id = id;
    }
    o = require(o, r2 < bound, id + " max|R2|=" + fmt(r2));
  }
  const double secs = seconds_since(t0);
  o.detail = std::to_string(suite.size()) + " entries, worst max|R2|/bound=" + fmt(worst) + " (" + worst_id + ") " +
             fmt(secs) + "s" + (o.detail.empty() ? "" : "; " + o.detail);
  return require(o, secs < 30.0, "runtime");
}

Outcome criterion5() {
  Outcome o;
  double worst_douglas = 0.0;
  int n = 0;
  for (const auto& [id, params] : oracle::closed_form_entries()) {
    const auto entry = get_entry(id, params);
    bool douglas = false;
    for (const auto& [name, status] : entry.expected) douglas |= name == "douglas" && status == Status::Pass;
    if (!douglas) continue;
    ++n;
    double res = 0.0;
    for (const auto& line : douglas_fit_grid(entry.profile, default_grid(entry.profile.domain())))
      res = std::max(res, line.residual / std::max(1.0, line.q_max));
    worst_douglas = std::max(worst_douglas, res);
    o = require(o, res < 1e-8, id + " douglas residual " + fmt(res));
  }
  const auto t1 = build_theorem1_profile(oracle::theorem1_spec(1.0));
  const auto grid = default_grid(t1.domain());
  double worst_fit = 0.0, worst_q = 0.0;
  for (const auto& line : douglas_fit_grid(t1, grid)) worst_fit = std::max(worst_fit, line.residual);
  for (const RsPoint& at : grid) worst_q = std::max(worst_q, std::abs(qss_invariant(t1, at) - 1.0));
  o = require(o, worst_fit > 1e-3, "theorem1 build looks Douglas");
  o = require(o, worst_q < 1e-6, "qss invariant off");
  o.detail = std::to_string(n) + " Douglas entries, worst residual=" + fmt(worst_douglas) +
             "; theorem1 k=1 max line residual=" + fmt(worst_fit) + " max|qss-1|=" + fmt(worst_q) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion6() {
  Outcome o;
  double worst = 0.0;
  const std::vector<std::pair<std::string, Params>> flat = {
      {"euclid", {}},         {"berwald", {{"sign", 1.0}}}, {"berwald", {{"sign", -1.0}}},
      {"ex001", {}},          {"erf_family", {{"m", 0.0}}}, {"erf_family", {{"m", 1.0}}},
      {"erf_family", {{"m", 2.0}}}, {"artanh_m0", {}},      {"corn2", {{"g", std::string("zero")}}}};
  for (const auto& [id, params] : flat) {
    const auto prof = get_entry(id, params).profile;
    const auto rep = classify(prof, default_grid(prof.domain()));
    const double v = std::max(rep.max_g_hat, rep.max_f_hat);
    worst = std::max(worst, v);
    o = require(o, v < 1e-8, id + " g_hat/f_hat=" + fmt(v));
  }
  for (const char* id : {"corn1", "example02"}) {
    const auto prof = get_entry(id).profile;
    const auto rep = classify(prof, default_grid(prof.domain()));
    o = require(o, rep.verdict("projectively_flat").status == Status::Fail,
                std::string(id) + " projectively_flat=" + std::string(to_string(rep.verdict("projectively_flat").status)));
  }
  o.detail = "g=0 entries max(g_hat, f_hat)=" + fmt(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::string detail;
  for (double k : {0.5, 1.0, 2.0}) {
    const auto e = oracle::characteristic_error(k);
    detail += (detail.empty() ? "" : " ") + std::string("k=") + fmt(k) + ": phi " + fmt(e.phi) + " kappa " +
              fmt(e.kappa);
    o = require(o, e.curves == 10, "k=" + fmt(k) + " only " + std::to_string(e.curves) + " usable curves");
    o = require(o, e.phi < 1e-6 && e.kappa < 1e-6, "k=" + fmt(k) + " drift");
  }
  o.detail = detail + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto P = get_entry("exs1", {{"h", std::string("ex10")}, {"c", 1.0}}).profile;
  const GFunction g = make_g("inv_r_neg");
  const DomainSpec dom{0.2, 2.0, {}};
  double worst_U = 0.0;
  for (const RsPoint& at : default_grid(dom)) worst_U = std::max(worst_U, std::abs(condU_residual(P, g, at)));
  o = require(o, worst_U < 1e-4, "condU residual");
  const auto prof = build_theorem3_profile(P, g, dom);
  Tolerances relaxed{1e-3, 1e-3, 1e-3, 1e-3, 1e-3};
  const auto rep = classify(prof, default_grid(prof.domain()), relaxed);
  const Status pos = rep.verdict("finsler_positive").status, con = rep.verdict("constant_flag").status;
  o = require(o, pos == Status::Pass, "positivity " + std::string(to_string(pos)));
  o = require(o, con == Status::Pass, "constant_flag " + std::string(to_string(con)));
  o.detail = "max|condU|=" + fmt(worst_U) + " K mean=" + fmt(rep.K.mean) + " spread=" + fmt(rep.K.spread) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  double jl = 0.0, jt = 0.0, r4 = 0.0, dual = 0.0;
  for (const auto& [id, params] : oracle::closed_form_entries()) {
    const auto prof = get_entry(id, params).profile;
    const auto grid = default_grid(prof.domain());
    const auto e = oracle::jet_difference_error(prof, grid);
    jl = std::max(jl, e.low);
    jt = std::max(jt, e.top);
    o = require(o, e.low <= 1e-5 && e.top <= 1e-3, id + " jets");
    const double r = oracle::r4_difference_error(prof, grid);
    r4 = std::max(r4, r);
    o = require(o, r < 1e-4, id + " R4");
  }
  const double t = oracle::t_identity_error();
  o = require(o, t < 1e-6, "T identity");
  for (const auto& c : oracle::dual_cases()) {
    const double d = oracle::dual_gap(get_entry(c.id, c.params).profile, c.spec);
    dual = std::max(dual, d);
    o = require(o, d < 1e-6, c.id + " dual gap " + fmt(d));
  }
  const double secs = seconds_since(t0);
  o.detail = "jets " + fmt(jl) + "/" + fmt(jt) + " R4 " + fmt(r4) + " T " + fmt(t) + " dual " + fmt(dual) + " " +
             fmt(secs) + "s" + (o.detail.empty() ? "" : "; " + o.detail);
  return require(o, secs < 60.0, "runtime");
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 20240611;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--seed N]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 constant curvature example02", [] { return constant_entry("example02", -4.0); }},
      {"2 constant curvature exs1_special", [] { return constant_entry("exs1_special", -1.0); }},
      {"3 berwald flat and straight", [seed] { return criterion3(seed); }},
      {"4 scalar flag suite", criterion4},
      {"5 douglas separation", criterion5},
      {"6 projective flatness", criterion6},
      {"7 characteristic invariance", criterion7},
      {"8 compatibility and theorem3 build", criterion8},
      {"9 oracle suites", criterion9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::printf("%s criterion %s: %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
