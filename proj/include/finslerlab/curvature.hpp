#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finslerlab/spray.hpp"

namespace finsler {

// R1 as an order-1 jet, so that its s-derivative feeds R4 directly.
Jet2 compute_R1(const SprayData& sd);
double compute_R2(const SprayData& sd);
double compute_R3(const SprayData& sd);
double compute_R4(const SprayData& sd);
double compute_R4(const MetricProfile& profile, const RsPoint& at);
double flag_curvature(const MetricProfile& profile, const RsPoint& at);

// R2 only needs Q; it stays available where P does not (phi <= 0).
double compute_R2(const Jet2& Q, const RsPoint& at);

struct CurvatureSample {
  RsPoint at;
  double phi = 0.0;
  double Q = 0.0;
  double R2 = 0.0;
  // Absent when phi <= 0 at the point.
  std::optional<double> P, R1, R3, R4, K;
};

CurvatureSample curvature_sample(const MetricProfile& profile, const RsPoint& at);

struct DouglasFit {
  double r = 0.0;
  double g_hat = 0.0;
  double f_hat = 0.0;
  double residual = 0.0;
  double q_max = 0.0;
  // NaN when g' is unavailable or r - 2 r^3 g_hat vanishes.
  double f_predicted = 0.0;
};

// f(r) = (2 g' + 4 r g^2) / (r - 2 r^3 g).
double douglas_f(double r, double g, double g_prime);

// Least-squares Q ~ g + s^2 f / 2 along one r-line.  g' for f_predicted comes
// from refits at r +- 1e-4 r with the same s/r ratios.
DouglasFit douglas_fit(const MetricProfile& profile, double r, std::span<const double> s_line);

// Fits every r-line of a grid; g' from the neighbouring lines.
std::vector<DouglasFit> douglas_fit_grid(const MetricProfile& profile, std::span<const RsPoint> grid);
std::vector<DouglasFit> douglas_fit_samples(std::span<const CurvatureSample> samples);

enum class Status { Pass, Fail, Inconclusive };
std::string_view to_string(Status s);

struct Verdict {
  std::string name;
  Status status = Status::Inconclusive;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct Tolerances {
  double scalar = 1e-6;
  double constant = 1e-6;
  double K_spread = 1e-6;
  // Relative to max(1, |Q|) on the line.
  double douglas = 1e-8;
  double flat = 1e-8;

  static Tolerances for_provenance(Provenance p);
};

// pass below tol, fail at or above max(100 tol, 1e-4), inconclusive between.
Status grade(double residual, double tol);

struct KStatistics {
  double mean = 0.0;
  double spread = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;
};

struct ClassificationReport {
  std::string name;
  Params params;
  std::string grid_description;
  std::size_t grid_points = 0;
  Provenance provenance = Provenance::ClosedForm;
  Tolerances tolerances;
  PositivityReport positivity;
  std::vector<Verdict> verdicts;
  double max_R2 = 0.0;
  double max_R3 = 0.0;
  double douglas_residual = 0.0;
  double max_g_hat = 0.0;
  double max_f_hat = 0.0;
  std::size_t skipped_points = 0;
  KStatistics K;
  std::vector<DouglasFit> lines;

  const Verdict& verdict(std::string_view name) const;
  bool constant_certified() const;
};

ClassificationReport classify(const MetricProfile& profile, std::span<const RsPoint> grid,
                              std::optional<Tolerances> tolerances = std::nullopt,
                              std::string grid_description = "");

std::vector<CurvatureSample> sample_grid(const MetricProfile& profile, std::span<const RsPoint> grid);

// R^i_j = R1 (|y|^2 d_ij - y_i y_j) + |y| R2 (|y| x_j - s y_j) x_i + R4 (|y| x_j - s y_j) y_i.
std::vector<std::vector<double>> riemann_assemble(const MetricProfile& profile, std::span<const double> x,
                                                  std::span<const double> y);

}  // namespace finsler
