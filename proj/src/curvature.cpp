#include "finslerlab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "finslerlab/parallel.hpp"

namespace finsler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string at_str(const RsPoint& at) {
  std::ostringstream os;
  os.precision(17);
  os << "(r=" << at.r << ", s=" << at.s << ")";
  return os.str();
}

}  // namespace

Jet2 compute_R1(const SprayData& sd) {
  const Jet2 r = sd.at.r_jet();
  const Jet2 s = sd.at.s_jet();
  const Jet2& P = sd.P;
  const Jet2& Q = sd.Q;
  const Jet2 P_r = P.d_r();
  const Jet2 P_s = P.d_s();
  return P * P - (s * P_r + r * P_s) / r + 2.0 * Q * (1.0 + s * P + (r * r - s * s) * P_s);
}

double compute_R2(const Jet2& Q, const RsPoint& at) {
  const double r = at.r, s = at.s;
  const double q = Q.value();
  const double q_s = Q.partial(0, 1);
  const double q_r = Q.partial(1, 0);
  const double q_ss = Q.partial(0, 2);
  const double q_rs = Q.partial(1, 1);
  return 2.0 * q * (2.0 * q - s * q_s) + (2.0 * q_r - s * q_rs - r * q_ss) / r +
         (r * r - s * s) * (2.0 * q * q_ss - q_s * q_s);
}

double compute_R2(const SprayData& sd) { return compute_R2(sd.Q, sd.at); }

double compute_R3(const SprayData& sd) {
  const double r = sd.at.r, s = sd.at.s;
  const double q = sd.Q.value();
  const double p = sd.P.value();
  const double p_r = sd.P.partial(1, 0);
  const double p_s = sd.P.partial(0, 1);
  const double p_ss = sd.P.partial(0, 2);
  const double p_rs = sd.P.partial(1, 1);
  return (((r * r - s * s) * 2.0 * q - 1.0) * r * p_ss - s * p_rs + p_r + r * 2.0 * q * (p - s * p_s)) / r;
}

double compute_R4(const SprayData& sd) {
  return 0.5 * (3.0 * compute_R3(sd) - compute_R1(sd).partial(0, 1));
}

double compute_R4(const MetricProfile& profile, const RsPoint& at) {
  return compute_R4(compute_spray(profile, at));
}

double flag_curvature(const MetricProfile& profile, const RsPoint& at) {
  const SprayData sd = compute_spray(profile, at);
  const double phi = sd.phi.value();
  return compute_R1(sd).value() / (phi * phi);
}

CurvatureSample curvature_sample(const MetricProfile& profile, const RsPoint& at) {
  CurvatureSample out;
  out.at = at;
  const Jet2 phi = profile.phi(at);
  const Jet2 Q = spray_Q(phi, at);
  out.phi = phi.value();
  out.Q = Q.value();
  out.R2 = compute_R2(Q, at);
  if (phi.value() > 0.0) {
    SprayData sd{at, phi, Q, spray_P(phi, Q, at)};
    const Jet2 R1 = compute_R1(sd);
    out.P = sd.P.value();
    out.R1 = R1.value();
    out.R3 = compute_R3(sd);
    out.R4 = 0.5 * (3.0 * *out.R3 - R1.partial(0, 1));
    out.K = *out.R1 / (out.phi * out.phi);
  }
  auto bad = [](const std::optional<double>& v) { return v && !std::isfinite(*v); };
  if (!std::isfinite(out.Q) || !std::isfinite(out.R2) || bad(out.P) || bad(out.R1) || bad(out.R3) ||
      bad(out.R4) || bad(out.K))
    throw Error(ErrorCode::NonFinite, profile.name() + ": non-finite curvature at " + at_str(at));
  return out;
}

double douglas_f(double r, double g, double g_prime) {
  const double den = r - 2.0 * r * r * r * g;
  if (std::abs(den) < 1e-12 || !std::isfinite(g_prime)) return kNaN;
  return (2.0 * g_prime + 4.0 * r * g * g) / den;
}

namespace {

// Least squares of q ~ g + (s^2/2) f.
DouglasFit fit_line(double r, std::span<const double> s, std::span<const double> q) {
  if (s.size() < 4) throw Error(ErrorCode::InsufficientPoints, "douglas fit needs at least 4 s-values");
  double n = 0.0, a = 0.0, aa = 0.0, b = 0.0, ab = 0.0;
  DouglasFit fit;
  fit.r = r;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = 0.5 * s[i] * s[i];
    n += 1.0;
    a += x;
    aa += x * x;
    b += q[i];
    ab += x * q[i];
    fit.q_max = std::max(fit.q_max, std::abs(q[i]));
  }
  const double det = n * aa - a * a;
  if (!(std::abs(det) > 1e-300)) throw Error(ErrorCode::InsufficientPoints, "douglas fit needs distinct |s| values");
  fit.f_hat = (n * ab - a * b) / det;
  fit.g_hat = (b - a * fit.f_hat) / n;
  for (std::size_t i = 0; i < s.size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(q[i] - fit.g_hat - 0.5 * s[i] * s[i] * fit.f_hat));
  fit.f_predicted = kNaN;
  return fit;
}

DouglasFit fit_profile_line(const MetricProfile& profile, double r, std::span<const double> s_line) {
  std::vector<double> q;
  q.reserve(s_line.size());
  for (double s : s_line) q.push_back(compute_Q(profile, RsPoint::make(r, s)).value());
  return fit_line(r, s_line, q);
}

// Three-point derivative on a non-uniform stencil, one-sided at the ends.
std::vector<double> line_derivative(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, kNaN);
  if (n < 2) return d;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      d[i] = (y[1] - y[0]) / (x[1] - x[0]);
    } else if (i + 1 == n) {
      d[i] = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    } else {
      const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
      d[i] = -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i] + h1 / (h2 * (h1 + h2)) * y[i + 1];
    }
  }
  return d;
}

void attach_predictions(std::vector<DouglasFit>& fits) {
  std::vector<double> rs, gs;
  for (const auto& f : fits) {
    rs.push_back(f.r);
    gs.push_back(f.g_hat);
  }
  const auto gp = line_derivative(rs, gs);
  for (std::size_t i = 0; i < fits.size(); ++i) fits[i].f_predicted = douglas_f(fits[i].r, fits[i].g_hat, gp[i]);
}

}  // namespace

DouglasFit douglas_fit(const MetricProfile& profile, double r, std::span<const double> s_line) {
  DouglasFit fit = fit_profile_line(profile, r, s_line);
  const double h = 1e-4 * r;
  std::vector<double> lo, hi;
  for (double s : s_line) {
    lo.push_back(s * (r - h) / r);
    hi.push_back(s * (r + h) / r);
  }
  try {
    const double g_lo = fit_profile_line(profile, r - h, lo).g_hat;
    const double g_hi = fit_profile_line(profile, r + h, hi).g_hat;
    fit.f_predicted = douglas_f(r, fit.g_hat, (g_hi - g_lo) / (2.0 * h));
  } catch (const Error&) {
    fit.f_predicted = kNaN;
  }
  return fit;
}

std::vector<DouglasFit> douglas_fit_samples(std::span<const CurvatureSample> samples) {
  std::vector<DouglasFit> fits;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    std::vector<double> s, q;
    while (j < samples.size() && samples[j].at.r == samples[i].at.r) {
      s.push_back(samples[j].at.s);
      q.push_back(samples[j].Q);
      ++j;
    }
    if (s.size() >= 4) fits.push_back(fit_line(samples[i].at.r, s, q));
    i = j;
  }
  attach_predictions(fits);
  return fits;
}

std::vector<DouglasFit> douglas_fit_grid(const MetricProfile& profile, std::span<const RsPoint> grid) {
  std::vector<DouglasFit> fits;
  std::size_t i = 0;
  while (i < grid.size()) {
    std::size_t j = i;
    std::vector<double> s;
    while (j < grid.size() && grid[j].r == grid[i].r) s.push_back(grid[j++].s);
    fits.push_back(fit_profile_line(profile, grid[i].r, s));
    i = j;
  }
  attach_predictions(fits);
  return fits;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Tolerances Tolerances::for_provenance(Provenance p) {
  Tolerances t;
  if (p == Provenance::Quadrature) {
    t.scalar = 1e-3;
    t.constant = 1e-3;
    t.K_spread = 1e-3;
    t.douglas = 1e-6;
    t.flat = 1e-6;
  }
  return t;
}

Status grade(double residual, double tol) {
  if (!std::isfinite(residual)) return Status::Inconclusive;
  if (residual < tol) return Status::Pass;
  if (residual >= std::max(100.0 * tol, 1e-4)) return Status::Fail;
  return Status::Inconclusive;
}

const Verdict& ClassificationReport::verdict(std::string_view name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return v;
  throw Error(ErrorCode::InvalidConfig, "no verdict named " + std::string(name));
}

bool ClassificationReport::constant_certified() const {
  return verdict("constant_flag").status == Status::Pass;
}

std::vector<CurvatureSample> sample_grid(const MetricProfile& profile, std::span<const RsPoint> grid) {
  std::vector<std::optional<CurvatureSample>> slots(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      slots[i] = curvature_sample(profile, grid[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularDenominator) throw;
    }
  });
  std::vector<CurvatureSample> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

ClassificationReport classify(const MetricProfile& profile, std::span<const RsPoint> grid,
                              std::optional<Tolerances> tolerances, std::string grid_description) {
  ClassificationReport rep;
  rep.name = profile.name();
  rep.params = profile.params();
  rep.provenance = profile.provenance();
  rep.grid_description = std::move(grid_description);
  rep.grid_points = grid.size();
  rep.tolerances = tolerances.value_or(Tolerances::for_provenance(profile.provenance()));
  const Tolerances& tol = rep.tolerances;

  const std::vector<CurvatureSample> samples = sample_grid(profile, grid);
  rep.skipped_points = grid.size() - samples.size();

  // Positivity margins come from the same phi jets.
  for (const auto& smp : samples) {
    const Jet2 phi = profile.phi(smp.at);
    const double m1 = phi.value() - smp.at.s * phi.partial(0, 1);
    const double m2 = m1 + (smp.at.r * smp.at.r - smp.at.s * smp.at.s) * phi.partial(0, 2);
    rep.positivity.add(smp.at, phi.value(), m1, m2);
  }

  std::size_t missing_p = 0;
  std::vector<double> ks;
  for (const auto& smp : samples) {
    rep.max_R2 = std::max(rep.max_R2, std::abs(smp.R2));
    if (smp.R3) {
      rep.max_R3 = std::max(rep.max_R3, std::abs(*smp.R3));
      ks.push_back(*smp.K);
    } else {
      ++missing_p;
    }
  }
  if (!ks.empty()) {
    rep.K.points = ks.size();
    rep.K.mean = std::accumulate(ks.begin(), ks.end(), 0.0) / static_cast<double>(ks.size());
    const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
    rep.K.min = *lo;
    rep.K.max = *hi;
    rep.K.spread = *hi - *lo;
  }

  rep.lines = douglas_fit_samples(samples);
  for (const auto& f : rep.lines) {
    rep.douglas_residual = std::max(rep.douglas_residual, f.residual / std::max(1.0, f.q_max));
    rep.max_g_hat = std::max(rep.max_g_hat, std::abs(f.g_hat));
    rep.max_f_hat = std::max(rep.max_f_hat, std::abs(f.f_hat));
  }

  const bool incomplete = rep.skipped_points > 0;

  Verdict positive{"finsler_positive", Status::Fail, 0.0, 0.0, ""};
  if (rep.positivity.points > 0) {
    positive.residual = std::min({rep.positivity.min_m0, rep.positivity.min_m1, rep.positivity.min_m2});
    positive.status = rep.positivity.positive() && !incomplete ? Status::Pass : Status::Fail;
  }
  if (incomplete) positive.note = "m2 <= 0 at skipped points";

  Verdict douglas{"douglas", Status::Inconclusive, rep.douglas_residual, tol.douglas, ""};
  if (rep.lines.empty()) {
    douglas.note = "no r-line with at least 4 points";
  } else {
    douglas.status = grade(rep.douglas_residual, tol.douglas);
  }

  Verdict scalar{"scalar_flag", grade(rep.max_R2, tol.scalar), rep.max_R2, tol.scalar, ""};

  Verdict constant{"constant_flag", Status::Inconclusive, std::max(rep.max_R3, rep.K.spread), tol.constant, ""};
  if (scalar.status == Status::Fail) {
    constant.status = Status::Fail;
    constant.note = "not of scalar flag curvature";
  } else if (ks.empty()) {
    constant.note = "phi <= 0 on the whole grid";
  } else {
    const Status r3 = grade(rep.max_R3, tol.constant);
    const Status sp = grade(rep.K.spread, tol.K_spread);
    if (r3 == Status::Fail || sp == Status::Fail)
      constant.status = Status::Fail;
    else if (r3 == Status::Pass && sp == Status::Pass && scalar.status == Status::Pass)
      constant.status = Status::Pass;
    if (missing_p > 0 && constant.status == Status::Pass) {
      constant.status = Status::Inconclusive;
      constant.note = "phi <= 0 at some grid points";
    }
  }

  const double flat_residual = std::max(rep.max_g_hat, rep.max_f_hat);
  Verdict flat{"projectively_flat", Status::Inconclusive, flat_residual, tol.flat, ""};
  if (douglas.status == Status::Fail) {
    flat.status = Status::Fail;
    flat.note = "not Douglas";
  } else if (douglas.status == Status::Pass) {
    flat.status = grade(flat_residual, tol.flat);
  }

  if (incomplete) {
    for (Verdict* v : {&douglas, &scalar, &constant, &flat}) {
      if (v->status == Status::Pass) {
        v->status = Status::Inconclusive;
        v->note = "some grid points were skipped";
      }
    }
  }

  rep.verdicts = {positive, douglas, scalar, constant, flat};
  return rep;
}

std::vector<std::vector<double>> riemann_assemble(const MetricProfile& profile, std::span<const double> x,
                                                  std::span<const double> y) {
  const RsPoint at = to_rs(x, y);
  const SprayData sd = compute_spray(profile, at);
  const double R1 = compute_R1(sd).value();
  const double R2 = compute_R2(sd);
  const double R4 = compute_R4(sd);
  const std::size_t n = x.size();
  double yy = 0.0;
  for (double v : y) yy += v * v;
  const double ny = std::sqrt(yy);
  std::vector<std::vector<double>> R(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = ny * x[j] - at.s * y[j];
      R[i][j] = R1 * ((i == j ? yy : 0.0) - y[i] * y[j]) + ny * R2 * w * x[i] + R4 * w * y[i];
    }
  }
  return R;
}

}  // namespace finsler
