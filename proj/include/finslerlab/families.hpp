#pragma once

// Metric families built from generator functions: the T / T-bar transforms,
// the s-integral constructions with an arbitrary eta, the exp-integral
// construction from a prescribed spray (P, Q), and characteristic curves.

#include <optional>
#include <string>
#include <vector>

#include "finslerlab/curvature.hpp"
#include "finslerlab/quadrature.hpp"

namespace finsler {

// g(r) from a named registry: zero, const(c), half, minus2, inv_r_neg.
struct GFunction {
  std::string name = "zero";
  double c = 0.0;

  Jet2 value(const Jet2& r) const;
  Jet2 derivative(const Jet2& r) const;
  double value(double r) const;
  double derivative(double r) const;

  // Every registry entry has closed-form T, T-bar (normalized so that the
  // integration constants vanish).
  Jet2 T_closed(const Jet2& r) const;
  Jet2 Tbar_closed(const Jet2& r) const;
};

GFunction make_g(const std::string& name, double c = 0.0);

// h(r): zero, one, const(c), exs1_special, exs1_half, ex10.  `c` scales
// the exs1 choices.
struct HFunction {
  std::string name = "zero";
  double c = 1.0;
  Jet2 value(const Jet2& r) const;
};

HFunction make_h(const std::string& name, double c = 1.0);

// eta(x), evaluated at a positive argument x (for Douglas builds x is minus
// the transport invariant, so that g = 0 gives x = r^2 - s^2).
//   sqrt:        c sqrt(x)
//   identity:    x
//   power:       x^m
//   power_family gamma x^{m+1/2} + eps sqrt(x)
//   erf_family:  sqrt(x) (gamma x^m + eps) e^x
//   ex001:       sqrt(x) (x + eps (1 - x)^3) / (1 - x)^{9/2}
//   polynomial:  sum_k coeffs[k] x^k
struct EtaFunction {
  std::string name = "identity";
  int m = 1;
  double eps = 1.0;
  double gamma = 1.0;
  double c = 1.0;
  std::vector<double> coeffs;

  Jet2 value(const Jet2& x) const;
  double value(double x) const;
};

EtaFunction make_eta(const std::string& name, int m = 1, double eps = 1.0, double gamma = 1.0, double c = 1.0);

enum class FamilyKind { Theorem1, Theorem2 };
enum class TransformMode { ClosedForm, Quadrature };

struct FamilySpec {
  FamilyKind kind = FamilyKind::Theorem2;
  std::string name;
  GFunction g;
  double k = 0.0;
  HFunction h;
  EtaFunction eta;
  double r_min = 0.2;
  double r_max = 0.9;
  std::optional<double> r0;  // T base point, default midpoint of the r-range
  // Values of T and T-bar at r0 for quadrature transforms.  Unset, the
  // integrals start from T(r0) = 1/(1-2 r0^2 g)^2 and T-bar(r0) = 0.
  std::optional<double> T_at_r0;
  std::optional<double> Tbar_at_r0;
  double s0_fraction = 0.5;
  double quadrature_tol = 1e-10;
  TransformMode transform = TransformMode::ClosedForm;

  double base_r() const { return r0.value_or(0.5 * (r_min + r_max)); }
};

struct TransformPair {
  // Jets in r only (s-partials vanish).
  Jet2 T;
  Jet2 Tbar;
  TransformMode provenance = TransformMode::ClosedForm;
};

// T(r) = exp(-int_{r0}^r 4ug/(1-2u^2 g) du) / (1 - 2r^2 g)^2,
// T-bar(r) = 4 int_{r0}^r (g' + 2ug^2)/(1 - 2u^2 g) T du.
TransformPair build_T(const GFunction& g, const Jet2& r, double r0, TransformMode mode, double tol = 1e-10);
TransformPair build_T(const FamilySpec& spec, const Jet2& r);
TransformPair build_T(const FamilySpec& spec, double r);

// theorem2: (r^2-s^2)/((r^2-s^2) T-bar - T); theorem1: the k-invariant phi-bar.
double transport_invariant(const FamilySpec& spec, const RsPoint& at);
Jet2 theorem1_invariant(double k, const Jet2& r, const Jet2& s);

// phi = s h(r) - s int_{s0(r)}^s eta(x(r,u)) / (u^2 sqrt(r^2-u^2)) du,
// s0(r) = sign(s) s0_fraction r.  Jets come from differentiating under the
// integral sign.
MetricProfile build_family_profile(const FamilySpec& spec);
MetricProfile build_theorem1_profile(const FamilySpec& spec);
MetricProfile build_theorem2_profile(const FamilySpec& spec);

// Adds s k(r) to `built` so that it agrees with `reference` on the line
// s = s0(r) = sign(s) s0_fraction r.  Two members of one family differ by
// such a term only, so this pins the gauge from one line of boundary data.
MetricProfile match_gauge(const MetricProfile& built, const MetricProfile& reference, double s0_fraction);

// -(sqrt(r^2-s^2)/s) d/ds eta(x) > 0 and eta/sqrt(r^2-s^2) > 0, reported as
// margins m1 and m0 of a PositivityReport (m2 repeats m1).
PositivityReport eta_monotonicity_check(const FamilySpec& spec, std::span<const RsPoint> grid);

// sqrt(r^2 - s^2) (phi - s phi_s); equals eta(x) on family builds and is
// blind to the gauge term s h(r).
double gauge_free_combination(const MetricProfile& profile, const RsPoint& at);

// Douglas Q = g + s^2 f / 2 as a jet.
Jet2 douglas_Q(const GFunction& g, const RsPoint& at);

// U = [(r^2-s^2)(s P_s - 2P) - s(1 + sP)] / [(r^2-s^2)(2Q - s Q_s) - sP - 1]
// with P the value of `p_profile` and Q from g.
Jet2 compute_U(const MetricProfile& p_profile, const GFunction& g, const RsPoint& at);
double condU_residual(const MetricProfile& p_profile, const GFunction& g, const RsPoint& at);

struct Theorem3Options {
  double s_base_fraction = 0.5;
  std::optional<double> r_base;
  double compat_tol = 1e-4;
  double quadrature_tol = 1e-10;
  bool check_positivity = true;
};

// phi = sqrt(r^2-s^2) exp(int U/(r^2-u^2) du), normalized along a path from
// one base point so that the r-dependence is fixed by the spray.
MetricProfile build_theorem3_profile(const MetricProfile& p_profile, const GFunction& g, const DomainSpec& domain,
                                     const Theorem3Options& opt = {});

struct CharacteristicCurve {
  std::vector<RsPoint> points;
  bool exited = false;
  std::string exit_reason;
  // Set when the arctan argument of phi-bar jumps by more than pi/2 per step.
  bool arctan_jump = false;
};

double characteristic_field(const FamilySpec& spec, double r, double X);
CharacteristicCurve characteristic_flow(const FamilySpec& spec, const RsPoint& start, double r_end, double step);

// kappa = kX/sqrt(r^2-X^2) - 1 and the conserved combination
// (1/2) ln((1+k^2) kappa^2 + 2 kappa + 1) + k atan(((1+k^2) kappa + 1)/k) - (1+k^2) ln r.
double kappa_relation(double k, double r, double X);

// (r^2 - s^2)^{3/2} (Q_s - s Q_ss).
double qss_invariant(const MetricProfile& profile, const RsPoint& at);

}  // namespace finsler
