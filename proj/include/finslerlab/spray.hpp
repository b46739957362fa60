#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "finslerlab/metric.hpp"

namespace finsler {

// Spray scalars of G^i = |y| P y^i + |y|^2 Q x^i at one (r, s) point.
// With phi an order-4 jet, Q and P come out as order-2 jets.
struct SprayData {
  RsPoint at;
  Jet2 phi;
  Jet2 Q;
  Jet2 P;
};

// Q from an already-evaluated phi jet; exposed so families can reuse it.
Jet2 spray_Q(const Jet2& phi, const RsPoint& at);
Jet2 spray_P(const Jet2& phi, const Jet2& Q, const RsPoint& at);

Jet2 compute_Q(const MetricProfile& profile, const RsPoint& at);
Jet2 compute_P(const MetricProfile& profile, const RsPoint& at);
SprayData compute_spray(const MetricProfile& profile, const RsPoint& at);

std::vector<double> spray_coefficients(const MetricProfile& profile, std::span<const double> x,
                                       std::span<const double> y);

struct GeodesicState {
  std::vector<double> x;
  std::vector<double> y;
  double t = 0.0;
};

struct GeodesicResult {
  std::vector<GeodesicState> states;
  bool exited = false;
  std::string exit_reason;
  // Endpoint difference between full and half steps, divided by 15.
  double error_estimate = 0.0;
};

// x' = y, y' = -2 G(x, y), classical RK4 with a fixed step.
GeodesicResult integrate_geodesic(const MetricProfile& profile, std::span<const double> x0,
                                  std::span<const double> y0, double t_end, double step);

double straightness_deviation(std::span<const GeodesicState> traj);

void write_trajectory_csv(std::ostream& os, const GeodesicResult& result);

}  // namespace finsler
