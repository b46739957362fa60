#include "finslerlab/spray.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "finslerlab/ode.hpp"

namespace finsler {

namespace {

constexpr double kMinRadius = 1e-6;

std::string at_str(const RsPoint& at) {
  std::ostringstream os;
  os.precision(17);
  os << "(r=" << at.r << ", s=" << at.s << ")";
  return os.str();
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

}  // namespace

Jet2 spray_Q(const Jet2& phi, const RsPoint& at) {
  if (at.r < kMinRadius) throw Error(ErrorCode::ZeroRadius, "spray evaluated at " + at_str(at));
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  const Jet2 phi_r = phi.d_r();
  const Jet2 phi_s = phi.d_s();
  const Jet2 phi_ss = phi_s.d_s();
  const Jet2 phi_rs = phi_r.d_s();
  const Jet2 m2 = phi - s * phi_s + (r * r - s * s) * phi_ss;
  if (!(m2.value() > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "m2 margin " << m2.value() << " at " << at_str(at);
    throw Error(ErrorCode::SingularDenominator, os.str());
  }
  return (r * phi_ss - phi_r + s * phi_rs) / (2.0 * r * m2);
}

Jet2 spray_P(const Jet2& phi, const Jet2& Q, const RsPoint& at) {
  if (!(phi.value() > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "phi = " << phi.value() << " at " << at_str(at);
    throw Error(ErrorCode::NonpositivePhi, os.str());
  }
  const Jet2 r = at.r_jet();
  const Jet2 s = at.s_jet();
  const Jet2 phi_r = phi.d_r();
  const Jet2 phi_s = phi.d_s();
  return (r * phi_s + s * phi_r) / (2.0 * r * phi) - Q / phi * (s * phi + (r * r - s * s) * phi_s);
}

Jet2 compute_Q(const MetricProfile& profile, const RsPoint& at) { return spray_Q(profile.phi(at), at); }

Jet2 compute_P(const MetricProfile& profile, const RsPoint& at) {
  const Jet2 phi = profile.phi(at);
  return spray_P(phi, spray_Q(phi, at), at);
}

SprayData compute_spray(const MetricProfile& profile, const RsPoint& at) {
  SprayData out;
  out.at = at;
  out.phi = profile.phi(at);
  out.Q = spray_Q(out.phi, at);
  out.P = spray_P(out.phi, out.Q, at);
  return out;
}

std::vector<double> spray_coefficients(const MetricProfile& profile, std::span<const double> x,
                                       std::span<const double> y) {
  const RsPoint at = to_rs(x, y);
  const SprayData sd = compute_spray(profile, at);
  const double ny = norm(y);
  const double p = sd.P.value();
  const double q = sd.Q.value();
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = ny * p * y[i] + ny * ny * q * x[i];
  return g;
}

namespace {

struct DomainExitSignal {
  std::string reason;
};

struct Run {
  std::vector<GeodesicState> states;
  bool exited = false;
  std::string reason;
};

Run run_geodesic(const MetricProfile& profile, const OdeState& z0, std::size_t n, double t_end, double h) {
  auto rhs = [&](double, const OdeState& z) {
    std::span<const double> x(z.data(), n);
    std::span<const double> y(z.data() + n, n);
    if (norm(x) < kMinRadius) throw DomainExitSignal{"r < 1e-6"};
    RsPoint at;
    try {
      at = to_rs(x, y);
    } catch (const Error& e) {
      throw DomainExitSignal{e.what()};
    }
    if (!profile.domain().contains(at)) throw DomainExitSignal{"left the domain at " + at_str(at)};
    const std::vector<double> g = spray_coefficients(profile, x, y);
    OdeState dz(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      dz[i] = y[i];
      dz[n + i] = -2.0 * g[i];
    }
    return dz;
  };

  Run run;
  auto push = [&](double t, const OdeState& z) {
    GeodesicState st;
    st.t = t;
    st.x.assign(z.begin(), z.begin() + n);
    st.y.assign(z.begin() + n, z.end());
    run.states.push_back(std::move(st));
  };

  const long steps = std::max(1L, std::lround(t_end / h));
  const double dt = t_end / static_cast<double>(steps);
  OdeState z = z0;
  push(0.0, z);
  for (long k = 0; k < steps; ++k) {
    try {
      z = rk4_step(rhs, k * dt, z, dt);
      // Stage points may stay inside while the endpoint leaves.
      rhs((k + 1) * dt, z);
    } catch (const DomainExitSignal& sig) {
      run.exited = true;
      run.reason = sig.reason;
      return run;
    }
    push((k + 1) * dt, z);
  }
  return run;
}

}  // namespace

GeodesicResult integrate_geodesic(const MetricProfile& profile, std::span<const double> x0,
                                  std::span<const double> y0, double t_end, double step) {
  if (!(step > 0.0) || !(t_end > 0.0)) throw Error(ErrorCode::InvalidConfig, "step and t_end must be positive");
  if (x0.size() != y0.size()) throw Error(ErrorCode::DomainError, "x0 and y0 have different dimensions");
  const std::size_t n = x0.size();
  if (norm(x0) < kMinRadius) throw Error(ErrorCode::ZeroRadius, "initial point at the origin");
  const RsPoint start = to_rs(x0, y0);
  if (!profile.domain().contains(start))
    throw Error(ErrorCode::DomainError, "initial state outside the domain at " + at_str(start));

  OdeState z0(x0.begin(), x0.end());
  z0.insert(z0.end(), y0.begin(), y0.end());

  Run full = run_geodesic(profile, z0, n, t_end, step);
  GeodesicResult out;
  out.exited = full.exited;
  out.exit_reason = full.reason;
  if (!full.exited) {
    Run half = run_geodesic(profile, z0, n, t_end, 0.5 * step);
    if (!half.exited) {
      const auto& a = full.states.back();
      const auto& b = half.states.back();
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(a.x[i] - b.x[i]));
        err = std::max(err, std::abs(a.y[i] - b.y[i]));
      }
      out.error_estimate = err / 15.0;
    }
  }
  out.states = std::move(full.states);
  return out;
}

namespace {

double path_length(std::span<const GeodesicState> traj) {
  double len = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < traj[k].x.size(); ++i) {
      const double d = traj[k].x[i] - traj[k - 1].x[i];
      d2 += d * d;
    }
    len += std::sqrt(d2);
  }
  return len;
}

// Distance from p to the line through a with direction u (unit).
double line_distance(const std::vector<double>& p, const std::vector<double>& a, const std::vector<double>& u) {
  double along = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) along += (p[i] - a[i]) * u[i];
  double d2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = p[i] - a[i] - along * u[i];
    d2 += c * c;
  }
  return std::sqrt(d2);
}

std::vector<double> unit_direction(const GeodesicState& s0) {
  const double ny = norm(s0.y);
  if (!(ny > 0.0)) throw Error(ErrorCode::ZeroTangent, "initial velocity vanishes");
  std::vector<double> u = s0.y;
  for (double& c : u) c /= ny;
  return u;
}

}  // namespace

double straightness_deviation(std::span<const GeodesicState> traj) {
  if (traj.size() < 3) throw Error(ErrorCode::InsufficientPoints, "straightness needs at least 3 states");
  const double len = path_length(traj);
  if (!(len > 0.0)) return 0.0;
  const auto u = unit_direction(traj.front());
  double worst = 0.0;
  for (const auto& st : traj) worst = std::max(worst, line_distance(st.x, traj.front().x, u));
  return worst / len;
}

void write_trajectory_csv(std::ostream& os, const GeodesicResult& result) {
  if (result.states.empty()) return;
  const std::size_t n = result.states.front().x.size();
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",y_" << i;
  os << ",deviation\n";
  const double len = path_length(result.states);
  const auto u = unit_direction(result.states.front());
  const auto old_prec = os.precision(17);
  for (const auto& st : result.states) {
    os << st.t;
    for (double v : st.x) os << ',' << v;
    for (double v : st.y) os << ',' << v;
    const double dev = len > 0.0 ? line_distance(st.x, result.states.front().x, u) / len : 0.0;
    os << ',' << dev << '\n';
  }
  os.precision(old_prec);
}

}  // namespace finsler
