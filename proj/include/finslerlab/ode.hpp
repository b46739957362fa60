#pragma once

#include <cstddef>
#include <vector>

namespace finsler {

using OdeState = std::vector<double>;

inline OdeState axpy(const OdeState& x, double a, const OdeState& k) {
  OdeState out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
  return out;
}

// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <class F>
OdeState rk4_step(F&& f, double t, const OdeState& x, double h) {
  const OdeState k1 = f(t, x);
  const OdeState k2 = f(t + 0.5 * h, axpy(x, 0.5 * h, k1));
  const OdeState k3 = f(t + 0.5 * h, axpy(x, 0.5 * h, k2));
  const OdeState k4 = f(t + h, axpy(x, h, k3));
  OdeState out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace finsler
