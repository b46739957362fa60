#include <random>

#include "doctest.h"
#include "finslerlab/families.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

MetricProfile phi_equals_s() {
  return MetricProfile("phi_s", {}, {0.1, 1.0, {}}, [](const RsPoint& at) { return at.s_jet(); });
}

// Random (x, y) with (r, s) inside the profile's domain.
std::pair<std::vector<double>, std::vector<double>> random_state(std::mt19937_64& rng, const MetricProfile& prof) {
  const DomainSpec& d = prof.domain();
  const double hi = std::isfinite(d.r_max) ? d.r_max : 2.0;
  for (;;) {
    auto x = oracle::random_vec(rng, -hi, hi);
    auto y = oracle::random_vec(rng, -1.0, 1.0);
    const RsPoint p = to_rs(x, y);
    if (p.r > d.r_min + 0.01 * (hi - d.r_min) && p.r < hi * 0.99 && d.contains(p) &&
        std::abs(std::abs(p.s) - p.r) > 1e-3 * p.r && std::abs(p.s) > 1e-3 * p.r)
      return {x, y};
  }
}

}  // namespace

TEST_SUITE("metric_core") {

TEST_CASE("to_rs examples") {
  const std::vector<double> e1{1, 0, 0};
  RsPoint p = to_rs(e1, std::vector<double>{0, 2, 0});
  CHECK(p.r == 1.0);
  CHECK(p.s == 0.0);
  p = to_rs(e1, std::vector<double>{3, 0, 0});
  CHECK(p.r == 1.0);
  CHECK(p.s == 1.0);
  p = to_rs(std::vector<double>{1, 1, 0}, std::vector<double>{1, 0, 0});
  CHECK(p.r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(p.s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(to_rs(e1, std::vector<double>{0, 0, 0}), Error);
  try {
    (void)to_rs(e1, std::vector<double>{0, 0, 0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroTangent);
  }
}

TEST_CASE("cone clamping") {
  const RsPoint p = RsPoint::make(1.0, 1.0 + 5e-15);
  CHECK(p.s == 1.0);
  CHECK_THROWS_AS(RsPoint::make(1.0, 1.0 + 1e-10), Error);
  CHECK_THROWS_AS(RsPoint::make(-0.1, 0.0), Error);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    auto x = oracle::random_vec(rng, -1e3, 1e3);
    auto y = x;
    for (auto& v : y) v *= 1.0 + 1e-9 * k;
    const RsPoint q = to_rs(x, y);
    CHECK(std::abs(q.s) <= q.r);
  }
}

TEST_CASE("eval_F examples") {
  const auto euclid = get_entry("euclid").profile;
  CHECK(eval_F(euclid, std::vector<double>{0.3, -0.2, 1.0}, std::vector<double>{3, 4, 0}) == doctest::Approx(5.0));
  // Berwald at the origin: phi(0, 0) = (1 + 0)^2 / (1 * 1) = 1.
  const auto berwald = get_entry("berwald").profile;
  const std::vector<double> y{0.6, -1.2, 2.0};
  CHECK(eval_F(berwald, std::vector<double>{0, 0, 0}, y) == doctest::Approx(oracle::norm(y)).epsilon(1e-15));
  CHECK_THROWS_AS(eval_F(berwald, std::vector<double>{1.5, 0, 0}, y), Error);
}

TEST_CASE("homogeneity and rotation invariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(1e-6, 10.0);
  for (const auto& [id, params] : oracle::closed_form_entries()) {
    const auto prof = get_entry(id, params).profile;
    INFO(id);
    for (int k = 0; k < 100; ++k) {
      auto [x, y] = random_state(rng, prof);
      const double l = lam(rng);
      auto ly = y;
      for (auto& v : ly) v *= l;
      const double F = eval_F(prof, x, y);
      CHECK(std::abs(eval_F(prof, x, ly) - l * F) <= 1e-12 * std::abs(F));
      const auto A = oracle::random_rotation(rng);
      CHECK(std::abs(eval_F(prof, oracle::apply(A, x), oracle::apply(A, y)) - F) <= 1e-10 * std::abs(F));
    }
  }
}

TEST_CASE("positivity margins") {
  const auto euclid = get_entry("euclid").profile;
  const auto grid = default_grid(euclid.domain());
  const PositivityReport e = positivity_check(euclid, grid);
  CHECK(e.positive());
  CHECK(e.min_m0 == 1.0);
  CHECK(e.min_m1 == 1.0);
  CHECK(e.min_m2 == 1.0);

  for (double sign : {1.0, -1.0}) {
    const auto berwald = get_entry("berwald", {{"sign", sign}}).profile;
    GridSpec gs;
    gs.r_max = 0.9;
    const PositivityReport b = positivity_check(berwald, default_grid(berwald.domain(), gs));
    CHECK(b.positive());
    CHECK(b.violations.empty());
  }

  const auto degenerate = phi_equals_s();
  const PositivityReport d = positivity_check(degenerate, default_grid(degenerate.domain()));
  CHECK_FALSE(d.positive());
  CHECK(d.min_m1 == 0.0);
  CHECK(!d.violations.empty());
}

TEST_CASE("eta monotonicity route") {
  FamilySpec erf;
  erf.kind = FamilyKind::Theorem2;
  erf.g = make_g("zero");
  erf.eta = make_eta("erf_family", 1, 1.0, 1.0);
  erf.r_min = 0.1;
  erf.r_max = 1.4;
  DomainSpec dom{erf.r_min, erf.r_max, {}};
  const auto grid = default_grid(dom);
  const PositivityReport a = eta_monotonicity_check(erf, grid);
  CHECK(a.positive());

  FamilySpec flat = erf;
  flat.eta = make_eta("polynomial");
  flat.eta.coeffs = {1.0};
  std::vector<RsPoint> upper;
  for (const auto& p : grid)
    if (p.s > 0) upper.push_back(p);
  const PositivityReport b = eta_monotonicity_check(flat, upper);
  CHECK(b.min_m0 > 0.0);
  CHECK_FALSE(b.min_m1 > 0.0);

  FamilySpec exs1;
  exs1.kind = FamilyKind::Theorem2;
  exs1.g = make_g("inv_r_neg");
  exs1.eta = make_eta("sqrt", 1, 1.0, 1.0, 1.0);
  exs1.r_min = 0.2;
  exs1.r_max = 2.0;
  const auto g2 = default_grid(DomainSpec{0.2, 2.0, {}});
  CHECK(eta_monotonicity_check(exs1, g2).positive());
  // The argument of eta is r(r^2-s^2)/(r+4(r^2-s^2)), i.e. minus the invariant.
  for (const auto& p : oracle::thin(g2, 37)) {
    const double d = p.r * p.r - p.s * p.s;
    CHECK(transport_invariant(exs1, p) == doctest::Approx(-p.r * d / (p.r + 4.0 * d)).epsilon(1e-13));
  }
}

}  // TEST_SUITE
