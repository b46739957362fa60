#include "finslerlab/jet.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

constexpr std::array<double, 5> kFactorial{1.0, 1.0, 2.0, 6.0, 24.0};
constexpr double kDivisionTolerance = 1e-14;

[[noreturn]] void domain_error(const char* fn, double x) {
  std::ostringstream os;
  os.precision(17);
  os << fn << " called with argument " << x << " outside its domain";
  throw Error(ErrorCode::DomainError, os.str());
}

using Coeffs = std::array<double, Jet2::kMaxOrder + 1>;

// Scale raw derivatives f^{(k)} to Taylor coefficients f^{(k)}/k!.
Coeffs taylor_from_derivs(Coeffs d) {
  for (int k = 0; k <= Jet2::kMaxOrder; ++k) d[k] /= kFactorial[k];
  return d;
}

}  // namespace

Jet2 Jet2::constant(double c, BasePoint at) {
  Jet2 j;
  j.c_[0] = c;
  j.base_ = at;
  return j;
}

Jet2 Jet2::variable(Var which, BasePoint at) {
  Jet2 j;
  j.base_ = at;
  if (which == Var::R) {
    j.c_[0] = at.r;
    j.c_[index(1, 0)] = 1.0;
  } else {
    j.c_[0] = at.s;
    j.c_[index(0, 1)] = 1.0;
  }
  return j;
}

double Jet2::partial(int i, int j) const {
  return c_[index(i, j)] * kFactorial[i] * kFactorial[j];
}

void Jet2::set_order(int order) {
  order_ = std::clamp(order, 0, kMaxOrder);
  for (int n = order_ + 1; n <= kMaxOrder; ++n)
    for (int j = 0; j <= n; ++j) c_[index(n - j, j)] = 0.0;
}

Jet2 Jet2::d_r() const {
  if (order_ < 1) throw Error(ErrorCode::DomainError, "r-derivative of an order-0 jet");
  Jet2 out;
  out.base_ = base_;
  out.order_ = order_ - 1;
  for (int n = 0; n <= out.order_; ++n)
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      out.c_[index(i, j)] = (i + 1) * c_[index(i + 1, j)];
    }
  return out;
}

Jet2 Jet2::d_s() const {
  if (order_ < 1) throw Error(ErrorCode::DomainError, "s-derivative of an order-0 jet");
  Jet2 out;
  out.base_ = base_;
  out.order_ = order_ - 1;
  for (int n = 0; n <= out.order_; ++n)
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      out.c_[index(i, j)] = (j + 1) * c_[index(i, j + 1)];
    }
  return out;
}

bool Jet2::all_finite() const {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
}

void Jet2::check_base(const Jet2& o) const {
  if (!(base_ == o.base_)) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << base_.r << ", " << base_.s << ") vs (" << o.base_.r << ", " << o.base_.s << ")";
    throw Error(ErrorCode::BasePointMismatch, os.str());
  }
}

Jet2 Jet2::operator-() const {
  Jet2 out = *this;
  for (auto& v : out.c_) v = -v;
  return out;
}

Jet2& Jet2::operator+=(const Jet2& o) {
  check_base(o);
  for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
  if (o.order_ < order_) set_order(o.order_);
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  check_base(o);
  for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
  if (o.order_ < order_) set_order(o.order_);
  return *this;
}

Jet2& Jet2::operator*=(double c) {
  for (auto& v : c_) v *= c;
  return *this;
}

Jet2& Jet2::operator/=(double c) {
  if (std::abs(c) < kDivisionTolerance) throw Error(ErrorCode::DivisionByZeroJet, "scalar divisor");
  for (auto& v : c_) v /= c;
  return *this;
}

Jet2& Jet2::operator*=(const Jet2& o) { return *this = *this * o; }
Jet2& Jet2::operator/=(const Jet2& o) { return *this = *this / o; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  a.check_base(b);
  Jet2 out;
  out.base_ = a.base_;
  out.order_ = std::min(a.order_, b.order_);
  for (int n = 0; n <= out.order_; ++n) {
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      double acc = 0.0;
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q)
          acc += a.c_[Jet2::index(p, q)] * b.c_[Jet2::index(i - p, j - q)];
      out.c_[Jet2::index(i, j)] = acc;
    }
  }
  return out;
}

Jet2 Jet2::compose(const std::array<double, kMaxOrder + 1>& d) const {
  Jet2 delta = *this;
  delta.c_[0] = 0.0;
  Jet2 out = Jet2::constant(d[order_], base_);
  out.order_ = order_;
  for (int k = order_ - 1; k >= 0; --k) {
    out = out * delta;
    out.c_[0] += d[k];
  }
  return out;
}

namespace {

Jet2 reciprocal(const Jet2& b) {
  const double x = b.value();
  if (std::abs(x) < kDivisionTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "divisor value " << x << " at (" << b.base().r << ", " << b.base().s << ")";
    throw Error(ErrorCode::DivisionByZeroJet, os.str());
  }
  Coeffs d{};
  double p = 1.0 / x;
  for (int k = 0; k <= Jet2::kMaxOrder; ++k) {
    d[k] = (k % 2 == 0 ? p : -p);
    p /= x;
  }
  return b.compose(d);
}

}  // namespace

Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
Jet2 operator/(double c, const Jet2& a) { return reciprocal(a) * c; }

Jet2 pow_int(const Jet2& a, int n) {
  if (n < 0) return pow_int(reciprocal(a), -n);
  Jet2 out = Jet2::constant(1.0, a.base());
  Jet2 base = a;
  while (n > 0) {
    if (n & 1) out = out * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  if (out.order() > a.order()) out.set_order(a.order());
  return out;
}

Jet2 pow(const Jet2& a, double p) {
  const double x = a.value();
  if (!(x > 0.0)) domain_error("pow", x);
  Coeffs d{};
  double binom = 1.0;
  for (int k = 0; k <= Jet2::kMaxOrder; ++k) {
    d[k] = binom * std::pow(x, p - k);
    binom *= (p - k) / (k + 1);
  }
  return a.compose(d);
}

Jet2 sqrt(const Jet2& a) {
  const double x = a.value();
  if (!(x > 0.0)) domain_error("sqrt", x);
  const double v = std::sqrt(x);
  // binomial series of x^{1/2}
  const Coeffs d{v, 0.5 * v / x, -0.125 * v / (x * x), 0.0625 * v / (x * x * x),
                 -0.0390625 * v / (x * x * x * x)};
  return a.compose(d);
}

Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value());
  return a.compose(taylor_from_derivs({e, e, e, e, e}));
}

Jet2 log(const Jet2& a) {
  const double x = a.value();
  if (!(x > 0.0)) domain_error("log", x);
  const Coeffs d{std::log(x), 1.0 / x, -1.0 / (2 * x * x), 1.0 / (3 * x * x * x),
                 -1.0 / (4 * x * x * x * x)};
  return a.compose(d);
}

Jet2 atan(const Jet2& a) {
  const double x = a.value();
  const double q = 1.0 / (1.0 + x * x);
  return a.compose(taylor_from_derivs({std::atan(x), q, -2.0 * x * q * q,
                                       (6.0 * x * x - 2.0) * q * q * q,
                                       24.0 * x * (1.0 - x * x) * q * q * q * q}));
}

Jet2 atanh(const Jet2& a) {
  const double x = a.value();
  if (!(std::abs(x) < 1.0)) domain_error("atanh", x);
  const double q = 1.0 / (1.0 - x * x);
  return a.compose(taylor_from_derivs({std::atanh(x), q, 2.0 * x * q * q,
                                       (2.0 + 6.0 * x * x) * q * q * q,
                                       24.0 * x * (1.0 + x * x) * q * q * q * q}));
}

Jet2 erf(const Jet2& a) {
  const double x = a.value();
  const double e = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
  return a.compose(taylor_from_derivs(
      {std::erf(x), e, -2.0 * x * e, (4.0 * x * x - 2.0) * e, (12.0 * x - 8.0 * x * x * x) * e}));
}

Jet2 sin(const Jet2& a) {
  const double sv = std::sin(a.value());
  const double cv = std::cos(a.value());
  return a.compose(taylor_from_derivs({sv, cv, -sv, -cv, sv}));
}

Jet2 cos(const Jet2& a) {
  const double sv = std::sin(a.value());
  const double cv = std::cos(a.value());
  return a.compose(taylor_from_derivs({cv, -sv, -cv, sv, cv}));
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivisionByZeroJet: return "DivisionByZeroJet";
    case ErrorCode::BasePointMismatch: return "BasePointMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ZeroTangent: return "ZeroTangent";
    case ErrorCode::ZeroRadius: return "ZeroRadius";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::NonpositivePhi: return "NonpositivePhi";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DomainExit: return "DomainExit";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::SingularIntegrand: return "SingularIntegrand";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::CompatibilityFailure: return "CompatibilityFailure";
    case ErrorCode::PositivityFailure: return "PositivityFailure";
    case ErrorCode::UnknownEntry: return "UnknownEntry";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace finsler
