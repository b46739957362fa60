#include "finslerlab/metric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

constexpr double kConeSlack = 1e-14;

std::string point_str(double r, double s) {
  std::ostringstream os;
  os.precision(17);
  os << "(r=" << r << ", s=" << s << ")";
  return os.str();
}

}  // namespace

RsPoint RsPoint::make(double r, double s) {
  if (!std::isfinite(r) || !std::isfinite(s)) throw Error(ErrorCode::NonFinite, point_str(r, s));
  if (r < 0.0) throw Error(ErrorCode::DomainError, "negative radius " + point_str(r, s));
  const double excess = std::abs(s) - r;
  if (excess > 0.0) {
    if (excess > kConeSlack * std::max(1.0, r))
      throw Error(ErrorCode::DomainError, "|s| > r at " + point_str(r, s));
    s = std::copysign(r, s);
  }
  return {r, s};
}

RsPoint to_rs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DomainError, "x and y have different dimensions");
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    yy += y[i] * y[i];
    xy += x[i] * y[i];
  }
  if (!(yy > 0.0)) throw Error(ErrorCode::ZeroTangent, "|y| = 0");
  return RsPoint::make(std::sqrt(xx), xy / std::sqrt(yy));
}

Constraint exclude_s_zero(double rel_margin) {
  std::ostringstream os;
  os << "s != 0";
  if (rel_margin > 0.0) os << " (|s| > " << rel_margin << " r)";
  return {os.str(), [rel_margin](double r, double s) { return std::abs(s) > rel_margin * r; }, false};
}

Constraint strict_cone() {
  return {"|s| < r", [](double r, double s) { return std::abs(s) < r; }, true};
}

bool DomainSpec::contains(const RsPoint& p) const {
  if (p.r < r_min || p.r > r_max) return false;
  for (const auto& c : constraints)
    if (c.hard && !c.admits(p.r, p.s)) return false;
  return true;
}

bool DomainSpec::admits_grid_point(const RsPoint& p) const {
  if (p.r < r_min || p.r > r_max) return false;
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const Constraint& c) { return c.admits(p.r, p.s); });
}

std::string DomainSpec::describe() const {
  // Shortest round-trip form, so 0.99 stays 0.99.
  auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  std::ostringstream os;
  os << num(r_min) << " <= r <= " << num(r_max);
  for (const auto& c : constraints) os << "; " << c.description << (c.hard ? "" : " (grid)");
  return os.str();
}

double param_number(const Params& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second)) return *v;
  throw Error(ErrorCode::ParamOutOfRange, "parameter '" + key + "' must be numeric");
}

std::string param_choice(const Params& params, const std::string& key, const std::string& fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
  throw Error(ErrorCode::ParamOutOfRange, "parameter '" + key + "' must be a name");
}

MetricProfile::MetricProfile(std::string name, Params params, DomainSpec domain, PhiEvaluator evaluator,
                             Provenance provenance)
    : name_(std::move(name)),
      params_(std::move(params)),
      domain_(std::move(domain)),
      evaluator_(std::move(evaluator)),
      provenance_(provenance) {}

Jet2 MetricProfile::phi(const RsPoint& at) const {
  if (!domain_.contains(at))
    throw Error(ErrorCode::DomainError, name_ + " evaluated outside its domain at " + point_str(at.r, at.s));
  Jet2 j = evaluator_(at);
  if (!j.all_finite())
    throw Error(ErrorCode::NonFinite, name_ + " produced a non-finite jet at " + point_str(at.r, at.s));
  return j;
}

double eval_F(const MetricProfile& profile, std::span<const double> x, std::span<const double> y) {
  const RsPoint p = to_rs(x, y);
  double yy = 0.0;
  for (double v : y) yy += v * v;
  return std::sqrt(yy) * profile.phi_value(p);
}

void PositivityReport::add(const RsPoint& at, double m0, double m1, double m2) {
  ++points;
  min_m0 = std::min(min_m0, m0);
  min_m1 = std::min(min_m1, m1);
  min_m2 = std::min(min_m2, m2);
  if (!(m0 > 0.0 && m1 > 0.0 && m2 > 0.0)) violations.push_back({at, m0, m1, m2});
}

PositivityReport positivity_check(const MetricProfile& profile, std::span<const RsPoint> grid) {
  PositivityReport rep;
  for (const RsPoint& p : grid) {
    const Jet2 phi = profile.phi(p);
    const double m0 = phi.value();
    const double m1 = m0 - p.s * phi.partial(0, 1);
    const double m2 = m1 + (p.r * p.r - p.s * p.s) * phi.partial(0, 2);
    rep.add(p, m0, m1, m2);
  }
  return rep;
}

std::vector<double> chebyshev_nodes(double a, double b, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {0.5 * (a + b)};
  out.reserve(n);
  // Chebyshev-Lobatto points, ascending, endpoints included.
  for (int k = n - 1; k >= 0; --k) {
    const double t = std::cos(std::numbers::pi * k / (n - 1));
    out.push_back(0.5 * (a + b) + 0.5 * (b - a) * t);
  }
  out.front() = a;
  out.back() = b;
  return out;
}

std::vector<RsPoint> default_grid(const DomainSpec& domain, const GridSpec& spec) {
  const double lo = spec.r_min.value_or(domain.r_min);
  const double hi = spec.r_max.value_or(domain.r_max);
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw Error(ErrorCode::InvalidConfig, "grid needs a finite r-range");
  const double delta = 1e-2 * (hi - lo);
  const auto rs = chebyshev_nodes(lo + delta, hi - delta, spec.n_r);
  const auto sigmas = chebyshev_nodes(-spec.sigma_max, spec.sigma_max, spec.n_s);
  std::vector<RsPoint> grid;
  grid.reserve(rs.size() * sigmas.size());
  for (double r : rs) {
    for (double sigma : sigmas) {
      if (std::abs(sigma) < spec.sigma_min) continue;
      const RsPoint p{r, sigma * r};
      if (domain.admits_grid_point(p)) grid.push_back(p);
    }
  }
  return grid;
}

}  // namespace finsler
