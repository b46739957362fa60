#pragma once

// Shared helpers for the unit tests: finite-difference oracles and seeded
// random states.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "finslerlab/catalog.hpp"
#include "finslerlab/families.hpp"

namespace oracle {

// Central differences at h, h/2, h/4 with two Richardson steps; error O(h^6).
inline double richardson_d1(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  const double d1 = d(h), d2 = d(0.5 * h), d4 = d(0.25 * h);
  const double e1 = (4.0 * d2 - d1) / 3.0, e2 = (4.0 * d4 - d2) / 3.0;
  return (16.0 * e2 - e1) / 15.0;
}

inline double rel_err(double got, double want, double floor = 1.0) {
  return std::abs(got - want) / std::max(floor, std::abs(want));
}

inline std::vector<double> random_vec(std::mt19937_64& rng, double lo, double hi, int n = 3) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline double norm(const std::vector<double>& v) {
  double a = 0.0;
  for (double x : v) a += x * x;
  return std::sqrt(a);
}

// Random rotation of R^3 from a unit quaternion.
inline std::vector<std::vector<double>> random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double q[4];
  double len = 0.0;
  for (double& c : q) {
    c = n(rng);
    len += c * c;
  }
  len = std::sqrt(len);
  for (double& c : q) c /= len;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
          {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
          {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

inline std::vector<double> apply(const std::vector<std::vector<double>>& A, const std::vector<double>& v) {
  std::vector<double> out(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += A[i][j] * v[j];
  return out;
}

// Closed-form catalog entries with their default parameters.
inline std::vector<std::pair<std::string, finsler::Params>> closed_form_entries() {
  using finsler::Params;
  return {{"euclid", {}},
          {"berwald", {{"sign", 1.0}}},
          {"berwald", {{"sign", -1.0}}},
          {"ex001", {}},
          {"erf_family", {{"m", 0.0}}},
          {"erf_family", {{"m", 1.0}}},
          {"erf_family", {{"m", 2.0}}},
          {"artanh_m0", {}},
          {"corn1", {}},
          {"corn2", {{"g", std::string("half")}}},
          {"corn2", {{"g", std::string("zero")}}},
          {"corn2", {{"g", std::string("inv_r_neg")}}},
          {"corn2", {{"g", std::string("minus2")}}},
          {"exs1", {}},
          {"exs1", {{"h", std::string("one")}}},
          {"example02", {}},
          {"exs1_special", {}},
          {"g_minus2", {}},
          {"ex10_sqrt", {{"sign", 1.0}}},
          {"ex10_sqrt", {{"sign", -1.0}}}};
}

// Every k-th point of a grid, to keep the expensive oracles short.
inline std::vector<finsler::RsPoint> thin(const std::vector<finsler::RsPoint>& g, std::size_t k) {
  std::vector<finsler::RsPoint> out;
  for (std::size_t i = 0; i < g.size(); i += k) out.push_back(g[i]);
  return out;
}

struct JetDifferenceError {
  double low = 0.0;  // partials of total order <= 3
  double top = 0.0;  // order 4
  finsler::RsPoint worst_at{};
};

// Every partial of order k+1 is the first difference of the jet's order-k
// partial.  Direct 4th-order stencils at h = 1e-3 are swamped by rounding
// (16 eps / h^4 ~ 1e-2), so the chain is checked one order at a time.
inline JetDifferenceError jet_difference_error(const finsler::MetricProfile& prof,
                                               const std::vector<finsler::RsPoint>& grid) {
  using finsler::Jet2;
  JetDifferenceError out;
  for (const finsler::RsPoint& at : grid) {
    auto inside = [&](double r, double s) { return std::abs(s) < r && prof.domain().contains({r, s}); };
    // The stencil keeps 8 steps clear of singular loci so that truncation
    // stays below the tolerance.
    double h = 1e-3;
    auto clear = [&](double k) {
      return inside(at.r + k, at.s) && inside(at.r - k, at.s) && inside(at.r, at.s + k) && inside(at.r, at.s - k) &&
             (at.s - k) * (at.s + k) > 0.0;
    };
    while (!clear(8.0 * h)) h *= 0.5;
    const Jet2 phi = prof.phi(at);
    double scale[Jet2::kMaxOrder + 1] = {};
    for (int n = 0; n <= Jet2::kMaxOrder; ++n)
      for (int j = 0; j <= n; ++j) scale[n] = std::max(scale[n], std::abs(phi.partial(n - j, j)));
    auto eval = [&](double r, double s) { return prof.phi(finsler::RsPoint::make(r, s)); };
    for (int n = 0; n < Jet2::kMaxOrder; ++n)
      for (int j = 0; j <= n; ++j) {
        const int i = n - j;
        const double dr = richardson_d1([&](double r) { return eval(r, at.s).partial(i, j); }, at.r, h);
        const double ds = richardson_d1([&](double s) { return eval(at.r, s).partial(i, j); }, at.s, h);
        const double floor = 1e-3 * std::max(1.0, scale[n + 1]);
        const double e =
            std::max(rel_err(phi.partial(i + 1, j), dr, floor), rel_err(phi.partial(i, j + 1), ds, floor));
        double& worst = n + 1 <= 3 ? out.low : out.top;
        if (e > worst) {
          worst = e;
          out.worst_at = at;
        }
      }
  }
  return out;
}

// R4 = (3 R3 - dR1/ds) / 2 with the s-derivative of R1 from Richardson
// differences.  A single central difference at 1e-4 loses to truncation next
// to the phi = 0 locus, where R4 reaches 1e6; the step starts at 1e-3 and is
// halved until the stencil clears s = 0 and the cone edge by 8 steps.
inline double r4_difference_error(const finsler::MetricProfile& prof, const std::vector<finsler::RsPoint>& grid) {
  using namespace finsler;
  double worst = 0.0;
  for (const RsPoint& at : grid) {
    if (prof.phi_value(at) <= 0.0) continue;
    double h = 1e-3;
    while (std::abs(at.s) <= 8 * h || at.r - std::abs(at.s) <= 8 * h) h *= 0.5;
    const SprayData sd = compute_spray(prof, at);
    const double dR1 = richardson_d1([&](double s) { return compute_R1(compute_spray(prof, {at.r, s})).value(); },
                                     at.s, h);
    worst = std::max(worst, rel_err(compute_R4(sd), 0.5 * (3.0 * compute_R3(sd) - dR1)));
  }
  return worst;
}

// (ln T)' = -4rg/(1-2r^2 g) + 2 (4rg + 2r^2 g')/(1-2r^2 g), against both the
// jet of the quadrature T and a Richardson difference of ln T.
inline double t_identity_error() {
  using namespace finsler;
  double worst = 0.0;
  for (const std::string name : {"half", "minus2", "inv_r_neg", "const"}) {
    const GFunction g = make_g(name, -0.7);
    for (double r : {0.25, 0.5, 0.85}) {
      const double gv = g.value(r), gp = g.derivative(r), d = 1.0 - 2 * r * r * gv;
      const double want = -4 * r * gv / d + 2 * (4 * r * gv + 2 * r * r * gp) / d;
      auto T = [&](double x) { return build_T(g, Jet2::lift_r(x, 0.0), 0.55, TransformMode::Quadrature, 1e-12).T; };
      const Jet2 t = T(r);
      const double fd = richardson_d1([&](double x) { return std::log(T(x).value()); }, r, 1e-3);
      worst = std::max({worst, rel_err(t.partial(1, 0) / t.value(), want), rel_err(fd, want)});
    }
  }
  return worst;
}

// Gauge-free combination of a closed-form entry against a family build with
// the same generators, on the default grid of the build.
inline double dual_gap(const finsler::MetricProfile& closed, const finsler::FamilySpec& spec) {
  using namespace finsler;
  const auto built = build_theorem2_profile(spec);
  double worst = 0.0;
  for (const RsPoint& at : default_grid(built.domain())) {
    if (!closed.domain().contains(at)) continue;
    const double a = gauge_free_combination(closed, at), b = gauge_free_combination(built, at);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

struct DualCase {
  std::string id;
  finsler::Params params;
  finsler::FamilySpec spec;
};

inline std::vector<DualCase> dual_cases() {
  using namespace finsler;
  auto spec = [](const char* g, EtaFunction eta, double lo, double hi) {
    FamilySpec s;
    s.g = make_g(g);
    s.eta = eta;
    s.r_min = lo;
    s.r_max = hi;
    return s;
  };
  return {{"exs1", {}, spec("inv_r_neg", make_eta("sqrt", 1, 1, 1, 1.0), 0.2, 2.0)},
          {"ex001", {}, spec("zero", make_eta("ex001", 1, 1.0), 0.05, 0.9)},
          {"erf_family", {{"m", 1.0}}, spec("zero", make_eta("erf_family", 1, 1.0, 1.0), 0.05, 1.5)},
          {"corn1", {}, spec("half", make_eta("power_family", 1, 1.0, 1.0), 0.05, 0.95)}};
}

// The theorem1 build used by the Douglas separation checks.
inline finsler::FamilySpec theorem1_spec(double k) {
  finsler::FamilySpec s;
  s.kind = finsler::FamilyKind::Theorem1;
  s.k = k;
  s.eta = finsler::make_eta("identity");
  s.h = finsler::make_h("zero");
  s.r_min = 0.5;
  s.r_max = 1.5;
  return s;
}

struct CharacteristicError {
  double phi = 0.0;    // relative drift of the invariant
  double kappa = 0.0;  // drift of the implicit kappa relation
  int curves = 0;
  int skipped = 0;     // curves flagged for an arctan jump
};

// Ten characteristics for the given k, started across the cone.
inline CharacteristicError characteristic_error(double k) {
  using namespace finsler;
  const FamilySpec spec = theorem1_spec(k);
  CharacteristicError out;
  for (int i = 0; i < 10; ++i) {
    const double r0 = 0.8 + 0.05 * i;
    const RsPoint start{r0, (0.15 + 0.05 * i) * r0};
    const auto c = characteristic_flow(spec, start, r0 + 0.3, 1e-3);
    if (c.arctan_jump || c.points.size() <= 10) {
      ++out.skipped;
      continue;
    }
    ++out.curves;
    const double phi0 = transport_invariant(spec, start);
    const double kap0 = kappa_relation(k, start.r, start.s);
    for (const RsPoint& p : c.points) {
      out.phi = std::max(out.phi, std::abs(transport_invariant(spec, p) - phi0) / std::abs(phi0));
      out.kappa = std::max(out.kappa, std::abs(kappa_relation(k, p.r, p.s) - kap0));
    }
  }
  return out;
}

}  // namespace oracle
