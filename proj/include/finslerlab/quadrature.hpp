#pragma once

// Adaptive Simpson quadrature over a generic value type (double or Jet2).

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finslerlab/errors.hpp"
#include "finslerlab/jet.hpp"

namespace finsler {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 40;
};

inline bool simpson_converged(double diff, double ref, double abs_tol, double rel_tol) {
  return std::abs(diff) <= 15.0 * std::max(abs_tol, rel_tol * std::abs(ref));
}

// Every Taylor coefficient must converge, relative to the largest coefficient
// of the same total order (a coefficient passing through zero would otherwise
// chase its own rounding noise).
inline bool simpson_converged(const Jet2& diff, const Jet2& ref, double abs_tol, double rel_tol) {
  for (int n = 0; n <= Jet2::kMaxOrder; ++n) {
    double scale = 0.0;
    for (int j = 0; j <= n; ++j) scale = std::max(scale, std::abs(ref.taylor(n - j, j)));
    for (int j = 0; j <= n; ++j)
      if (!simpson_converged(diff.taylor(n - j, j), scale, abs_tol, rel_tol)) return false;
  }
  return true;
}

inline bool value_finite(double v) { return std::isfinite(v); }
inline bool value_finite(const Jet2& v) { return v.all_finite(); }

namespace detail {

template <class V, class F>
V simpson_recurse(F& f, double a, double b, const V& fa, const V& fm, const V& fb, const V& whole,
                  double abs_tol, double rel_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double h = b - a;
  const V flm = f(0.5 * (a + m));
  const V frm = f(0.5 * (m + b));
  const V left = (fa + 4.0 * flm + fm) * (h / 12.0);
  const V right = (fm + 4.0 * frm + fb) * (h / 12.0);
  const V both = left + right;
  const V diff = both - whole;
  if (!value_finite(both)) throw Error(ErrorCode::QuadratureFailure, "non-finite integrand value");
  if (simpson_converged(diff, both, abs_tol, rel_tol)) return both + diff * (1.0 / 15.0);
  if (depth <= 0) {
    std::ostringstream os;
    os.precision(17);
    os << "no convergence on [" << a << ", " << b << "]";
    throw Error(ErrorCode::QuadratureFailure, os.str());
  }
  return simpson_recurse<V>(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol, depth - 1) +
         simpson_recurse<V>(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace detail

// Starts from 8 panels so a lucky coarse estimate cannot end the refinement.
template <class V, class F>
V adaptive_simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  constexpr int kPanels = 8;
  const double h = (b - a) / kPanels;
  V fa = f(a);
  V total = fa * 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == kPanels ? b : a + (p + 1) * h;
    const V fb = f(hi);
    const V fm = f(0.5 * (lo + hi));
    const V whole = (fa + 4.0 * fm + fb) * ((hi - lo) / 6.0);
    total = total + detail::simpson_recurse<V>(f, lo, hi, fa, fm, fb, whole, opt.abs_tol / kPanels, opt.rel_tol,
                                               opt.max_depth);
    fa = fb;
  }
  return total;
}

// Composite 10-point Gauss-Legendre on a fixed number of panels.  Smooth in
// the endpoints, which matters when the result feeds another adaptive rule.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 8) {
  static constexpr double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
                                  0.9739065285171717};
  static constexpr double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                  0.0666713443086881};
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h, half = 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    total += half * acc;
  }
  return total;
}

}  // namespace finsler
