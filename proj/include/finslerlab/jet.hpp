#pragma once

// Truncated bivariate Taylor arithmetic in (r, s).
//
// A Jet2 holds the Taylor expansion of a scalar function about a base point
// up to total order 4.  Internally the coefficients are the normalized
// Taylor coefficients c[i][j] = f^{(i,j)} / (i! j!); partial() converts to
// raw partial derivatives.  Each jet also tracks the total order up to which
// its coefficients are valid: differentiating drops one order, and binary
// operations keep the smaller of the two.

#include <array>
#include <cmath>
#include <cstddef>

#include "finslerlab/errors.hpp"

namespace finsler {

struct BasePoint {
  double r = 0.0;
  double s = 0.0;

  friend bool operator==(const BasePoint&, const BasePoint&) = default;
};

enum class Var { R, S };

class Jet2 {
 public:
  static constexpr int kMaxOrder = 4;
  static constexpr int kSize = (kMaxOrder + 1) * (kMaxOrder + 2) / 2;

  Jet2() = default;

  static Jet2 constant(double c, BasePoint at = {});
  static Jet2 variable(Var which, BasePoint at);
  static Jet2 lift_r(double r, double s) { return variable(Var::R, {r, s}); }
  static Jet2 lift_s(double r, double s) { return variable(Var::S, {r, s}); }

  // Flat position of (i, j) in the order-4 triangle.
  static constexpr int index(int i, int j) {
    const int n = i + j;
    return n * (n + 1) / 2 + j;
  }

  double value() const { return c_[0]; }
  double taylor(int i, int j) const { return c_[index(i, j)]; }
  double partial(int i, int j) const;
  double& taylor_ref(int i, int j) { return c_[index(i, j)]; }

  const BasePoint& base() const { return base_; }
  int order() const { return order_; }
  void set_order(int order);

  Jet2 d_r() const;
  Jet2 d_s() const;

  bool all_finite() const;

  Jet2 operator-() const;
  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(const Jet2& o);
  Jet2& operator/=(const Jet2& o);
  Jet2& operator+=(double c) {
    c_[0] += c;
    return *this;
  }
  Jet2& operator-=(double c) {
    c_[0] -= c;
    return *this;
  }
  Jet2& operator*=(double c);
  Jet2& operator/=(double c);

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b);
  friend Jet2 operator/(const Jet2& a, const Jet2& b);
  friend Jet2 operator+(Jet2 a, double c) { return a += c; }
  friend Jet2 operator+(double c, Jet2 a) { return a += c; }
  friend Jet2 operator-(Jet2 a, double c) { return a -= c; }
  friend Jet2 operator-(double c, const Jet2& a) { return (-a) += c; }
  friend Jet2 operator*(Jet2 a, double c) { return a *= c; }
  friend Jet2 operator*(double c, Jet2 a) { return a *= c; }
  friend Jet2 operator/(Jet2 a, double c) { return a /= c; }
  friend Jet2 operator/(double c, const Jet2& a);

  // Univariate composition: given the Taylor coefficients d[k] = f^{(k)}(x0)/k!
  // of f at x0 = value(), return f(*this).
  Jet2 compose(const std::array<double, kMaxOrder + 1>& d) const;

 private:
  void check_base(const Jet2& o) const;

  std::array<double, kSize> c_{};
  BasePoint base_{};
  int order_ = kMaxOrder;
};

Jet2 pow_int(const Jet2& a, int n);
Jet2 pow(const Jet2& a, double p);
Jet2 sqrt(const Jet2& a);
Jet2 exp(const Jet2& a);
Jet2 log(const Jet2& a);
Jet2 atan(const Jet2& a);
Jet2 atanh(const Jet2& a);
Jet2 erf(const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);

// Scalar counterparts so formula templates instantiate for double as well.
inline double pow_int(double a, int n) { return std::pow(a, n); }

}  // namespace finsler
