#pragma once

// Spherically symmetric metric profiles F(x, y) = |y| phi(|x|, <x,y>/|y|).

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "finslerlab/jet.hpp"

namespace finsler {

// (r, s) = (|x|, <x,y>/|y|).  Always satisfies r >= 0 and |s| <= r.
struct RsPoint {
  double r = 0.0;
  double s = 0.0;

  // Clamps |s| to r when the overshoot is within 1e-14 (relative to r),
  // rejects anything larger.
  static RsPoint make(double r, double s);

  BasePoint base() const { return {r, s}; }
  Jet2 r_jet() const { return Jet2::lift_r(r, s); }
  Jet2 s_jet() const { return Jet2::lift_s(r, s); }
};

RsPoint to_rs(std::span<const double> x, std::span<const double> y);

// A named predicate on (r, s).  Hard constraints bound where the profile is
// defined at all; soft ones only keep verification grids off singular loci.
struct Constraint {
  std::string description;
  std::function<bool(double r, double s)> admits;
  bool hard = false;
};

Constraint exclude_s_zero(double rel_margin = 0.0);
Constraint strict_cone();

struct DomainSpec {
  double r_min = 0.0;
  double r_max = std::numeric_limits<double>::infinity();
  std::vector<Constraint> constraints;

  // Domain membership: r-range plus hard constraints.
  bool contains(const RsPoint& p) const;
  // Grid admissibility: membership plus soft constraints.
  bool admits_grid_point(const RsPoint& p) const;
  std::string describe() const;
};

using ParamValue = std::variant<double, std::string>;
using Params = std::map<std::string, ParamValue>;

double param_number(const Params& params, const std::string& key, double fallback);
std::string param_choice(const Params& params, const std::string& key, const std::string& fallback);

enum class Provenance { ClosedForm, Quadrature };

using PhiEvaluator = std::function<Jet2(const RsPoint&)>;

class MetricProfile {
 public:
  MetricProfile(std::string name, Params params, DomainSpec domain, PhiEvaluator evaluator,
                Provenance provenance = Provenance::ClosedForm);

  const std::string& name() const { return name_; }
  const Params& params() const { return params_; }
  const DomainSpec& domain() const { return domain_; }
  Provenance provenance() const { return provenance_; }

  // Order-4 jet of phi at the point; DomainError outside the domain,
  // NonFinite if the evaluator produced NaN/Inf.
  Jet2 phi(const RsPoint& at) const;
  double phi_value(const RsPoint& at) const { return phi(at).value(); }

 private:
  std::string name_;
  Params params_;
  DomainSpec domain_;
  PhiEvaluator evaluator_;
  Provenance provenance_;
};

double eval_F(const MetricProfile& profile, std::span<const double> x, std::span<const double> y);

struct PositivityViolation {
  RsPoint at;
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

// Margins m0 = phi, m1 = phi - s phi_s, m2 = m1 + (r^2 - s^2) phi_ss.
struct PositivityReport {
  std::size_t points = 0;
  double min_m0 = std::numeric_limits<double>::infinity();
  double min_m1 = std::numeric_limits<double>::infinity();
  double min_m2 = std::numeric_limits<double>::infinity();
  std::vector<PositivityViolation> violations;

  bool positive() const { return points > 0 && min_m0 > 0.0 && min_m1 > 0.0 && min_m2 > 0.0; }
  void add(const RsPoint& at, double m0, double m1, double m2);
};

PositivityReport positivity_check(const MetricProfile& profile, std::span<const RsPoint> grid);

// Tensor grid of Chebyshev-spaced r-values in [r_min + d, r_max - d],
// d = 1e-2 (r_max - r_min), times s = sigma r with sigma Chebyshev-spaced in
// [-0.95, 0.95] and |sigma| >= 0.05.  Points failing the domain are dropped.
struct GridSpec {
  int n_r = 24;
  int n_s = 24;
  double sigma_max = 0.95;
  double sigma_min = 0.05;
  std::optional<double> r_min;
  std::optional<double> r_max;
};

std::vector<double> chebyshev_nodes(double a, double b, int n);
std::vector<RsPoint> default_grid(const DomainSpec& domain, const GridSpec& spec = {});

}  // namespace finsler
