#include "finslerlab/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "finslerlab/ode.hpp"

namespace finsler {

namespace {

std::string at_str(double r, double s) {
  std::ostringstream os;
  os.precision(17);
  os << "(r=" << r << ", s=" << s << ")";
  return os.str();
}

Jet2 constant_like(double c, const Jet2& like) { return Jet2::constant(c, like.base()); }

// Jet of F at r from its value and the jet of F' (an r-only function).
Jet2 integrate_r(double value, const Jet2& derivative) {
  Jet2 out = Jet2::constant(value, derivative.base());
  for (int i = 0; i < Jet2::kMaxOrder; ++i) out.taylor_ref(i + 1, 0) = derivative.taylor(i, 0) / (i + 1);
  out.set_order(std::min(Jet2::kMaxOrder, derivative.order() + 1));
  return out;
}

}  // namespace

// ---------------------------------------------------------------- generators

Jet2 GFunction::value(const Jet2& r) const {
  if (name == "zero") return constant_like(0.0, r);
  if (name == "inv_r_neg") return -1.0 / r;
  return constant_like(c, r);
}

Jet2 GFunction::derivative(const Jet2& r) const {
  if (name == "inv_r_neg") return 1.0 / (r * r);
  return constant_like(0.0, r);
}

double GFunction::value(double r) const { return value(Jet2::constant(r)).value(); }
double GFunction::derivative(double r) const { return derivative(Jet2::constant(r)).value(); }

Jet2 GFunction::T_closed(const Jet2& r) const {
  if (name == "inv_r_neg") return constant_like(1.0, r);
  return 1.0 / (1.0 - 2.0 * c * r * r);
}

Jet2 GFunction::Tbar_closed(const Jet2& r) const {
  if (name == "inv_r_neg") return -4.0 / r;
  return (2.0 * c) / (1.0 - 2.0 * c * r * r);
}

GFunction make_g(const std::string& name, double c) {
  if (name == "zero") return {"zero", 0.0};
  if (name == "const") return {"const", c};
  if (name == "half") return {"half", 0.5};
  if (name == "minus2") return {"minus2", -2.0};
  if (name == "inv_r_neg") return {"inv_r_neg", 0.0};
  throw Error(ErrorCode::UnknownEntry, "unknown g generator '" + name + "'");
}

Jet2 HFunction::value(const Jet2& r) const {
  if (name == "zero") return constant_like(0.0, r);
  if (name == "one") return constant_like(1.0, r);
  if (name == "const") return constant_like(c, r);
  if (name == "exs1_special") return 2.0 * c / ((1.0 + 2.0 * r) * (1.0 + 4.0 * r));
  if (name == "exs1_half") return c / ((1.0 + 2.0 * r) * (1.0 + 4.0 * r));
  if (name == "ex10") return -2.0 * (1.0 + 3.0 * r) / (r * (1.0 + 2.0 * r) * (1.0 + 4.0 * r));
  throw Error(ErrorCode::UnknownEntry, "unknown h generator '" + name + "'");
}

HFunction make_h(const std::string& name, double c) {
  HFunction h{name, c};
  h.value(Jet2::constant(1.0));  // validates the name
  return h;
}

Jet2 EtaFunction::value(const Jet2& x) const {
  if (name == "identity") return x;
  if (name == "sqrt") return c * sqrt(x);
  if (name == "power") return pow_int(x, m);
  if (name == "power_family") return sqrt(x) * (gamma * pow_int(x, m) + eps);
  if (name == "erf_family") return sqrt(x) * (gamma * pow_int(x, m) + eps) * exp(x);
  if (name == "ex001") {
    const Jet2 w = 1.0 - x;
    return sqrt(x) * (x + eps * pow_int(w, 3)) / (pow_int(w, 4) * sqrt(w));
  }
  if (name == "polynomial") {
    Jet2 acc = constant_like(0.0, x);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
  throw Error(ErrorCode::UnknownEntry, "unknown eta generator '" + name + "'");
}

double EtaFunction::value(double x) const { return value(Jet2::constant(x)).value(); }

EtaFunction make_eta(const std::string& name, int m, double eps, double gamma, double c) {
  EtaFunction e;
  e.name = name;
  e.m = m;
  e.eps = eps;
  e.gamma = gamma;
  e.c = c;
  if (name != "polynomial") e.value(Jet2::constant(0.25));  // validates the name
  return e;
}

// ---------------------------------------------------------------- transforms

namespace {

void guard_denominator(const GFunction& g, double r) {
  const double d = 1.0 - 2.0 * r * r * g.value(r);
  if (std::abs(d) < 1e-10)
    throw Error(ErrorCode::SingularIntegrand, "1 - 2 r^2 g(r) vanishes at r = " + std::to_string(r));
}

double log_T_integral(const GFunction& g, double r0, double r, double tol) {
  if (r == r0) return 0.0;
  return -adaptive_simpson<double>(
      [&](double u) {
        guard_denominator(g, u);
        const double gu = g.value(u);
        return 4.0 * u * gu / (1.0 - 2.0 * u * u * gu);
      },
      r0, r, {tol, tol});
}

// T inside the T-bar integrand.  An adaptive inner rule would make the outer
// integrand noisy at the inner tolerance and stall the outer refinement.
double T_smooth(const GFunction& g, double r0, double r) {
  const double d = 1.0 - 2.0 * r * r * g.value(r);
  const double log_t = -gauss_legendre(
      [&](double u) {
        const double gu = g.value(u);
        return 4.0 * u * gu / (1.0 - 2.0 * u * u * gu);
      },
      r0, r, 16);
  return std::exp(log_t) / (d * d);
}

}  // namespace

TransformPair build_T(const GFunction& g, const Jet2& r, double r0, TransformMode mode, double tol) {
  TransformPair out;
  out.provenance = mode;
  if (mode == TransformMode::ClosedForm) {
    out.T = g.T_closed(r);
    out.Tbar = g.Tbar_closed(r);
    return out;
  }
  const double rv = r.value();
  guard_denominator(g, rv);
  const Jet2 gr = g.value(r);
  const Jet2 den = 1.0 - 2.0 * r * r * gr;
  const Jet2 logT_int = integrate_r(log_T_integral(g, r0, rv, tol), -4.0 * r * gr / den);
  out.T = exp(logT_int) / (den * den);
  const double tbar = r0 == rv ? 0.0
                               : 4.0 * adaptive_simpson<double>(
                                           [&](double u) {
                                             guard_denominator(g, u);
                                             const double gu = g.value(u);
                                             return (g.derivative(u) + 2.0 * u * gu * gu) /
                                                    (1.0 - 2.0 * u * u * gu) * T_smooth(g, r0, u);
                                           },
                                           r0, rv, {tol, tol});
  out.Tbar = integrate_r(tbar, 4.0 * (g.derivative(r) + 2.0 * r * gr * gr) / den * out.T);
  return out;
}

TransformPair build_T(const FamilySpec& spec, const Jet2& r) {
  TransformPair tp = build_T(spec.g, r, spec.base_r(), spec.transform, spec.quadrature_tol);
  if (spec.transform == TransformMode::Quadrature && (spec.T_at_r0 || spec.Tbar_at_r0)) {
    // T-bar' is linear in T, so rescaling T rescales T-bar up to a constant.
    const double r0 = spec.base_r(), d0 = 1.0 - 2.0 * r0 * r0 * spec.g.value(r0);
    const double lambda = spec.T_at_r0 ? *spec.T_at_r0 * d0 * d0 : 1.0;
    tp.T = tp.T * lambda;
    tp.Tbar = tp.Tbar * lambda + spec.Tbar_at_r0.value_or(0.0);
  }
  return tp;
}

TransformPair build_T(const FamilySpec& spec, double r) { return build_T(spec, Jet2::lift_r(r, 0.0)); }

Jet2 theorem1_invariant(double k, const Jet2& r, const Jet2& s) {
  const Jet2 d = r * r - s * s;
  if (!(d.value() > 0.0)) throw Error(ErrorCode::DomainError, "|s| >= r in the invariant");
  const Jet2 a = sqrt(d);
  const Jet2 den = k * k * s * s - 2.0 * k * s * a + r * r;
  if (std::abs(den.value()) < 1e-14) throw Error(ErrorCode::SingularDenominator, "k^2 s^2 - 2ks sqrt(r^2-s^2) + r^2 = 0");
  return pow(r, 2.0 * (k * k + 1.0)) * d * exp(2.0 * k * atan(k - (1.0 + k * k) * s / a)) / den;
}

namespace {

// x(r, u) for Douglas builds: minus the transport invariant.
Jet2 douglas_argument(const TransformPair& tp, const Jet2& r, const Jet2& u) {
  const Jet2 d = r * r - u * u;
  const Jet2 den = tp.T - d * tp.Tbar;
  if (!(den.value() > 0.0)) throw Error(ErrorCode::SingularIntegrand, "T - (r^2-s^2) T-bar <= 0");
  return d / den;
}

}  // namespace

double transport_invariant(const FamilySpec& spec, const RsPoint& at) {
  if (!(std::abs(at.s) < at.r)) throw Error(ErrorCode::DomainError, "|s| >= r at " + at_str(at.r, at.s));
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  if (spec.kind == FamilyKind::Theorem1) return theorem1_invariant(spec.k, r, s).value();
  const TransformPair tp = build_T(spec, r);
  const Jet2 d = r * r - s * s;
  const Jet2 den = d * tp.Tbar - tp.T;
  if (std::abs(den.value()) < 1e-14) throw Error(ErrorCode::SingularDenominator, "(r^2-s^2) T-bar - T = 0");
  return (d / den).value();
}

// ---------------------------------------------------------------- builders

namespace {

Jet2 family_argument(const FamilySpec& spec, const TransformPair* tp, const Jet2& r, const Jet2& u) {
  if (spec.kind == FamilyKind::Theorem1) return theorem1_invariant(spec.k, r, u);
  return douglas_argument(*tp, r, u);
}

// Quadrature transforms depend on r alone; every s on an r-line shares them.
struct TransformCache {
  struct Entry {
    std::array<double, Jet2::kMaxOrder + 1> T{}, Tbar{};
    int order_T = 0, order_Tbar = 0;
  };
  std::mutex mu;
  std::map<double, Entry> values;
};

Jet2 rebase(const std::array<double, Jet2::kMaxOrder + 1>& coeffs, int order, const BasePoint& at) {
  Jet2 j = Jet2::constant(0.0, at);
  for (int n = 0; n <= Jet2::kMaxOrder; ++n) j.taylor_ref(n, 0) = coeffs[n];
  j.set_order(order);
  return j;
}

TransformPair cached_T(const FamilySpec& spec, const Jet2& r, TransformCache* cache) {
  if (!cache || spec.transform != TransformMode::Quadrature) return build_T(spec, r);
  const double key = r.value();
  {
    std::lock_guard<std::mutex> lock(cache->mu);
    auto it = cache->values.find(key);
    if (it != cache->values.end()) {
      TransformPair tp;
      tp.provenance = TransformMode::Quadrature;
      tp.T = rebase(it->second.T, it->second.order_T, r.base());
      tp.Tbar = rebase(it->second.Tbar, it->second.order_Tbar, r.base());
      return tp;
    }
  }
  TransformPair tp = build_T(spec, r);
  TransformCache::Entry e;
  for (int n = 0; n <= Jet2::kMaxOrder; ++n) {
    e.T[n] = tp.T.taylor(n, 0);
    e.Tbar[n] = tp.Tbar.taylor(n, 0);
  }
  e.order_T = tp.T.order();
  e.order_Tbar = tp.Tbar.order();
  std::lock_guard<std::mutex> lock(cache->mu);
  cache->values.emplace(key, e);
  return tp;
}

Jet2 family_phi(const FamilySpec& spec, const RsPoint& at, TransformCache* cache) {
  if (at.s == 0.0 || !(std::abs(at.s) < at.r))
    throw Error(ErrorCode::SingularIntegrand, "integration path touches u = 0 or |u| = r at " + at_str(at.r, at.s));
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  std::optional<TransformPair> tp;
  if (spec.kind == FamilyKind::Theorem2) tp = cached_T(spec, r, cache);
  const Jet2 s0 = std::copysign(spec.s0_fraction, at.s) * r;
  const Jet2 span = s - s0;
  if (tp) {
    // T - (r^2-u^2) T-bar is linear in u^2; positive at both ends means positive throughout.
    for (double u : {s0.value(), at.s}) {
      if (!(tp->T.value() - (at.r * at.r - u * u) * tp->Tbar.value() > 0.0))
        throw Error(ErrorCode::SingularIntegrand,
                    "T - (r^2-u^2) T-bar is not positive on the integration path at " + at_str(at.r, at.s));
    }
  }
  // u = s0 + tau (s - s0) keeps every jet at the evaluation point.
  auto integrand = [&](double tau) {
    const Jet2 u = s0 + tau * span;
    const Jet2 x = family_argument(spec, tp ? &*tp : nullptr, r, u);
    if (!(x.value() > 0.0)) throw Error(ErrorCode::SingularIntegrand, "eta argument is not positive");
    return spec.eta.value(x) / (u * u * sqrt(r * r - u * u));
  };
  const Jet2 integral = span * adaptive_simpson<Jet2>(integrand, 0.0, 1.0, {spec.quadrature_tol, spec.quadrature_tol});
  return s * spec.h.value(r) - s * integral;
}

void scan_denominator(const GFunction& g, double r_min, double r_max) {
  constexpr int kScan = 2000;
  double prev = 1.0 - 2.0 * r_min * r_min * g.value(r_min);
  for (int i = 0; i <= kScan; ++i) {
    const double r = r_min + (r_max - r_min) * i / kScan;
    const double d = 1.0 - 2.0 * r * r * g.value(r);
    if (std::abs(d) < 1e-10 || d * prev < 0.0)
      throw Error(ErrorCode::SingularIntegrand, "1 - 2 r^2 g(r) vanishes near r = " + std::to_string(r));
    prev = d;
  }
}

Params family_params(const FamilySpec& spec) {
  Params p;
  p["kind"] = std::string(spec.kind == FamilyKind::Theorem1 ? "theorem1" : "theorem2");
  if (spec.kind == FamilyKind::Theorem1) {
    p["k"] = spec.k;
  } else {
    p["g"] = spec.g.name;
    if (spec.g.name == "const") p["g_c"] = spec.g.c;
    p["transform"] = std::string(spec.transform == TransformMode::ClosedForm ? "closed_form" : "quadrature");
  }
  p["h"] = spec.h.name;
  p["eta"] = spec.eta.name;
  p["m"] = static_cast<double>(spec.eta.m);
  p["eps"] = spec.eta.eps;
  p["gamma"] = spec.eta.gamma;
  p["c"] = spec.eta.c;
  p["s0_fraction"] = spec.s0_fraction;
  return p;
}

}  // namespace

MetricProfile build_family_profile(const FamilySpec& spec) {
  if (!(spec.r_min > 0.0 && spec.r_min < spec.r_max))
    throw Error(ErrorCode::InvalidConfig, "family r-range must satisfy 0 < r_min < r_max");
  if (!(spec.s0_fraction > 0.0 && spec.s0_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "s0_fraction must lie in (0, 1)");
  if (spec.kind == FamilyKind::Theorem2) scan_denominator(spec.g, spec.r_min, spec.r_max);
  DomainSpec dom;
  dom.r_min = spec.r_min;
  dom.r_max = spec.r_max;
  dom.constraints = {strict_cone(), exclude_s_zero()};
  dom.constraints.back().hard = true;
  std::string name = spec.name;
  if (name.empty()) name = spec.kind == FamilyKind::Theorem1 ? "theorem1" : "theorem2";
  auto cache = std::make_shared<TransformCache>();
  return MetricProfile(name, family_params(spec), dom,
                       [spec, cache](const RsPoint& at) { return family_phi(spec, at, cache.get()); },
                       Provenance::Quadrature);
}

MetricProfile build_theorem1_profile(const FamilySpec& spec) {
  FamilySpec s = spec;
  s.kind = FamilyKind::Theorem1;
  return build_family_profile(s);
}

MetricProfile build_theorem2_profile(const FamilySpec& spec) {
  FamilySpec s = spec;
  s.kind = FamilyKind::Theorem2;
  return build_family_profile(s);
}

PositivityReport eta_monotonicity_check(const FamilySpec& spec, std::span<const RsPoint> grid) {
  PositivityReport rep;
  for (const RsPoint& p : grid) {
    const Jet2 r = p.r_jet();
    const Jet2 s = p.s_jet();
    std::optional<TransformPair> tp;
    if (spec.kind == FamilyKind::Theorem2) tp = build_T(spec, r);
    const Jet2 eta = spec.eta.value(family_argument(spec, tp ? &*tp : nullptr, r, s));
    const double a = std::sqrt(p.r * p.r - p.s * p.s);
    const double m0 = eta.value() / a;
    const double m1 = -(a / p.s) * eta.partial(0, 1);
    rep.add(p, m0, m1, m1);
  }
  return rep;
}

double gauge_free_combination(const MetricProfile& profile, const RsPoint& at) {
  const Jet2 phi = profile.phi(at);
  return std::sqrt(at.r * at.r - at.s * at.s) * (phi.value() - at.s * phi.partial(0, 1));
}

// ---------------------------------------------------------------- theorem 3

Jet2 douglas_Q(const GFunction& g, const RsPoint& at) {
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  const Jet2 gv = g.value(r);
  const Jet2 f = (2.0 * g.derivative(r) + 4.0 * r * gv * gv) / (r - 2.0 * r * r * r * gv);
  return gv + 0.5 * s * s * f;
}

Jet2 compute_U(const MetricProfile& p_profile, const GFunction& g, const RsPoint& at) {
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  const Jet2 P = p_profile.phi(at);
  const Jet2 Q = douglas_Q(g, at);
  const Jet2 d = r * r - s * s;
  const Jet2 den = d * (2.0 * Q - s * Q.d_s()) - s * P - 1.0;
  if (std::abs(den.value()) < 1e-12)
    throw Error(ErrorCode::SingularDenominator, "U denominator vanishes at " + at_str(at.r, at.s));
  return (d * (s * P.d_s() - 2.0 * P) - s * (1.0 + s * P)) / den;
}

double condU_residual(const MetricProfile& p_profile, const GFunction& g, const RsPoint& at) {
  const double r = at.r, s = at.s;
  const Jet2 U = compute_U(p_profile, g, at);
  const Jet2 P = p_profile.phi(at);
  const Jet2 Q = douglas_Q(g, at);
  const double d = r * r - s * s;
  const double u = U.value();
  const double q = Q.value(), q_s = Q.partial(0, 1);
  const double p = P.value(), p_s = P.partial(0, 1);
  return s * (s * U.partial(1, 0) + (1.0 - d * 2.0 * q) * r * U.partial(0, 1)) -
         r * (1.0 + d * 2.0 * (s * q_s - q)) * u - 2.0 * r * d * (s * p_s - p);
}

namespace {

// Gradient of L = ln phi:  L_s = (U - s)/(r^2 - s^2),
// L_r = (W - r (U - s)/(r^2 - s^2)) / s with W = 2r (P + U Q).
struct LogGradient {
  MetricProfile p_profile;
  GFunction g;

  Jet2 d_s(const RsPoint& at) const {
    const Jet2 r = at.r_jet();
    const Jet2 s = at.s_jet();
    return (compute_U(p_profile, g, at) - s) / (r * r - s * s);
  }

  Jet2 d_r(const RsPoint& at) const {
    const Jet2 r = at.r_jet();
    const Jet2 s = at.s_jet();
    const Jet2 U = compute_U(p_profile, g, at);
    const Jet2 W = 2.0 * r * (p_profile.phi(at) + U * douglas_Q(g, at));
    return (W - r * (U - s) / (r * r - s * s)) / s;
  }
};

struct RayCache {
  std::mutex mu;
  std::map<double, double> values;
};

}  // namespace

MetricProfile build_theorem3_profile(const MetricProfile& p_profile, const GFunction& g, const DomainSpec& domain,
                                     const Theorem3Options& opt) {
  const double r_b = opt.r_base.value_or(0.5 * (domain.r_min + domain.r_max));
  const double sigma_b = opt.s_base_fraction;
  if (!(std::abs(sigma_b) > 0.0 && std::abs(sigma_b) < 1.0))
    throw Error(ErrorCode::InvalidConfig, "s_base fraction must lie in (0, 1) in absolute value");

  // Integrability of the gradient system.
  GridSpec coarse;
  coarse.n_r = 12;
  coarse.n_s = 12;
  double worst = 0.0;
  RsPoint worst_at{};
  for (const RsPoint& p : default_grid(domain, coarse)) {
    const double res = std::abs(condU_residual(p_profile, g, p));
    if (!(res <= worst)) {
      worst = res;
      worst_at = p;
    }
  }
  if (!(worst < opt.compat_tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "condU residual " << worst << " at " << at_str(worst_at.r, worst_at.s);
    throw Error(ErrorCode::CompatibilityFailure, os.str());
  }

  const LogGradient grad{p_profile, g};
  const double tol = opt.quadrature_tol;
  // L along the base ray depends on r only; every point of an r-line shares it.
  auto ray_cache = std::make_shared<RayCache>();
  auto evaluator = [grad, r_b, sigma_b, tol, ray_cache](const RsPoint& at) {
    if (at.s == 0.0) throw Error(ErrorCode::DomainError, "theorem3 jets need s != 0");
    // Along the ray s = sigma_b r, then along the s-line at fixed r.
    std::optional<double> ray;
    {
      std::lock_guard<std::mutex> lock(ray_cache->mu);
      auto it = ray_cache->values.find(at.r);
      if (it != ray_cache->values.end()) ray = it->second;
    }
    if (!ray) {
      double v = 0.5 * std::log(r_b * r_b * (1.0 - sigma_b * sigma_b));
      if (at.r != r_b) {
        v += adaptive_simpson<double>(
            [&](double rho) {
              const RsPoint q{rho, sigma_b * rho};
              return grad.d_r(q).value() + sigma_b * grad.d_s(q).value();
            },
            r_b, at.r, {tol, tol});
      }
      std::lock_guard<std::mutex> lock(ray_cache->mu);
      ray_cache->values.emplace(at.r, v);
      ray = v;
    }
    double L = *ray;
    const double s_start = sigma_b * at.r;
    if (at.s != s_start) {
      L += adaptive_simpson<double>([&](double u) { return grad.d_s(RsPoint{at.r, u}).value(); }, s_start, at.s,
                                    {tol, tol});
    }
    const Jet2 Ls = grad.d_s(at);
    const Jet2 Lr = grad.d_r(at);
    Jet2 Ljet = Jet2::constant(L, at.base());
    for (int n = 0; n < Jet2::kMaxOrder; ++n) {
      for (int j = 0; j <= n; ++j) Ljet.taylor_ref(n - j, j + 1) = Ls.taylor(n - j, j) / (j + 1);
      Ljet.taylor_ref(n + 1, 0) = Lr.taylor(n, 0) / (n + 1);
    }
    Ljet.set_order(std::min(Ls.order(), Lr.order()) + 1);
    return exp(Ljet);
  };

  Params params;
  params["p_profile"] = p_profile.name();
  params["g"] = g.name;
  params["s_base_fraction"] = sigma_b;
  params["r_base"] = r_b;
  DomainSpec dom = domain;
  dom.constraints.push_back(exclude_s_zero());
  dom.constraints.back().hard = true;
  MetricProfile out("theorem3(" + p_profile.name() + ")", params, dom, evaluator, Provenance::Quadrature);

  if (opt.check_positivity) {
    const auto grid = default_grid(dom);
    const PositivityReport pos = positivity_check(out, grid);
    if (!pos.positive()) {
      std::ostringstream os;
      os << "min margins m0=" << pos.min_m0 << " m1=" << pos.min_m1 << " m2=" << pos.min_m2;
      throw Error(ErrorCode::PositivityFailure, os.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------- characteristics

double characteristic_field(const FamilySpec& spec, double r, double X) {
  const double d = r * r - X * X;
  if (!(d > 0.0) || X == 0.0) throw Error(ErrorCode::DomainExit, "characteristic left 0 < |X| < r");
  if (spec.kind == FamilyKind::Theorem1) {
    const double a = std::sqrt(d);
    const double b = spec.k * X - a;
    return (r / X) * (1.0 - d / (r * r * r * r) * (d - b * b));
  }
  const double g = spec.g.value(r);
  const double f = douglas_f(r, g, spec.g.derivative(r));
  return (r / X) * (1.0 - d * (2.0 * g + f * X * X));
}

namespace {

double arctan_argument(double k, double r, double X) {
  return std::atan(k - (1.0 + k * k) * X / std::sqrt(r * r - X * X));
}

}  // namespace

CharacteristicCurve characteristic_flow(const FamilySpec& spec, const RsPoint& start, double r_end, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidConfig, "step must be positive");
  if (!(start.s != 0.0 && std::abs(start.s) < start.r))
    throw Error(ErrorCode::DomainError, "characteristic must start with 0 < |s| < r");
  CharacteristicCurve curve;
  curve.points.push_back(start);
  const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(r_end - start.r) / step)));
  const double dr = (r_end - start.r) / static_cast<double>(n);
  const double sign = std::copysign(1.0, start.s);
  OdeState x{start.s};
  double r = start.r;
  double prev_arg = spec.kind == FamilyKind::Theorem1 ? arctan_argument(spec.k, r, x[0]) : 0.0;
  auto rhs = [&](double rr, const OdeState& z) { return OdeState{characteristic_field(spec, rr, z[0])}; };
  for (long i = 0; i < n; ++i) {
    try {
      x = rk4_step(rhs, r, x, dr);
    } catch (const Error& e) {
      curve.exited = true;
      curve.exit_reason = e.what();
      return curve;
    }
    r = start.r + (i + 1) * dr;
    if (!(x[0] * sign > 0.0) || !(x[0] * x[0] < r * r)) {
      curve.exited = true;
      curve.exit_reason = "DomainExit: X left 0 < |X| < r at r = " + std::to_string(r);
      return curve;
    }
    if (spec.kind == FamilyKind::Theorem1) {
      const double arg = arctan_argument(spec.k, r, x[0]);
      if (std::abs(arg - prev_arg) > 0.5 * std::numbers::pi) curve.arctan_jump = true;
      prev_arg = arg;
    }
    curve.points.push_back(RsPoint{r, x[0]});
  }
  return curve;
}

double kappa_relation(double k, double r, double X) {
  const double kappa = k * X / std::sqrt(r * r - X * X) - 1.0;
  const double q = 1.0 + k * k;
  return 0.5 * std::log(q * kappa * kappa + 2.0 * kappa + 1.0) + k * std::atan((q * kappa + 1.0) / k) - q * std::log(r);
}

double qss_invariant(const MetricProfile& profile, const RsPoint& at) {
  const Jet2 Q = compute_Q(profile, at);
  const double d = at.r * at.r - at.s * at.s;
  return d * std::sqrt(d) * (Q.partial(0, 1) - at.s * Q.partial(0, 2));
}

MetricProfile match_gauge(const MetricProfile& built, const MetricProfile& reference, double s0_fraction) {
  auto eval = [built, reference, s0_fraction](const RsPoint& at) {
    const double sigma = (at.s < 0.0 ? -1.0 : 1.0) * s0_fraction;
    const RsPoint line{at.r, sigma * at.r};
    const Jet2 diff = reference.phi(line) - built.phi(line);
    // Restrict to the line ds = sigma dr: a series in r alone.
    Jet2 along = Jet2::constant(0.0, at.base());
    for (int n = 0; n <= Jet2::kMaxOrder; ++n) {
      double a = 0.0, pw = 1.0;
      for (int j = 0; j <= n; ++j, pw *= sigma) a += diff.taylor(n - j, j) * pw;
      along.taylor_ref(n, 0) = a;
    }
    along.set_order(diff.order());
    return built.phi(at) + at.s_jet() * along / (sigma * at.r_jet());
  };
  Params params = built.params();
  params["gauge_reference"] = reference.name();
  DomainSpec dom{std::max(built.domain().r_min, reference.domain().r_min),
                 std::min(built.domain().r_max, reference.domain().r_max), built.domain().constraints};
  for (const auto& c : reference.domain().constraints) dom.constraints.push_back(c);
  return MetricProfile(built.name(), params, dom, eval, built.provenance());
}

}  // namespace finsler
