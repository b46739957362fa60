#include <array>
#include <numbers>
#include <random>

#include "doctest.h"
#include "finslerlab/jet.hpp"
#include "oracles.hpp"

using namespace finsler;

TEST_SUITE("jets") {

TEST_CASE("variable lifts") {
  const Jet2 r = Jet2::lift_r(2.0, 0.3);
  CHECK(r.partial(0, 0) == 2.0);
  CHECK(r.partial(1, 0) == 1.0);
  const Jet2 s = Jet2::lift_s(1.0, 0.5);
  CHECK(s.partial(0, 0) == 0.5);
  CHECK(s.partial(0, 1) == 1.0);
  const Jet2 z = Jet2::lift_r(0.0, 0.0);
  CHECK(z.value() == 0.0);
  CHECK(z.partial(1, 0) == 1.0);
  for (int n = 2; n <= Jet2::kMaxOrder; ++n)
    for (int j = 0; j <= n; ++j) {
      CHECK(r.partial(n - j, j) == 0.0);
      CHECK(s.partial(n - j, j) == 0.0);
    }
  CHECK(r.partial(0, 1) == 0.0);
  CHECK(s.partial(1, 0) == 0.0);
}

TEST_CASE("lift then read is bit exact") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(Jet2::lift_r(a, b).value() == a);
    CHECK(Jet2::lift_s(a, b).value() == b);
    CHECK(Jet2::constant(c, {a, b}).value() == c);
  }
}

TEST_CASE("polynomial products are exact") {
  const Jet2 r = Jet2::lift_r(3.0, 0.0);
  const Jet2 sq = r * r;
  CHECK(sq.partial(0, 0) == 9.0);
  CHECK(sq.partial(1, 0) == 6.0);
  CHECK(sq.partial(2, 0) == 2.0);
  CHECK(sq.partial(3, 0) == 0.0);
  CHECK(sq.partial(1, 1) == 0.0);
  const Jet2 a = r * r - 2.0 * r + 5.0;
  const Jet2 zero = a + (-a);
  for (int n = 0; n <= Jet2::kMaxOrder; ++n)
    for (int j = 0; j <= n; ++j) CHECK(zero.taylor(n - j, j) == 0.0);
}

TEST_CASE("derivatives of 1/r at r = 2") {
  const Jet2 r = Jet2::lift_r(2.0, 0.0);
  const Jet2 q = Jet2::constant(1.0, r.base()) / r;
  // d^k/dr^k r^{-1} = (-1)^k k! r^{-k-1}
  CHECK(q.partial(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q.partial(1, 0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(q.partial(2, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(q.partial(3, 0) == doctest::Approx(-0.375).epsilon(1e-15));
  CHECK(q.partial(4, 0) == doctest::Approx(24.0 / 32.0).epsilon(1e-15));
}

TEST_CASE("sqrt, exp and erf at reference points") {
  const Jet2 x = Jet2::lift_r(4.0, 0.0);
  const Jet2 rt = sqrt(x);
  CHECK(rt.value() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rt.partial(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rt.partial(2, 0) == doctest::Approx(-1.0 / 32.0).epsilon(1e-15));
  CHECK(rt.partial(3, 0) == doctest::Approx(3.0 / 256.0).epsilon(1e-15));

  const Jet2 e = exp(Jet2::constant(0.0));
  CHECK(e.value() == 1.0);
  for (int n = 1; n <= Jet2::kMaxOrder; ++n)
    for (int j = 0; j <= n; ++j) CHECK(e.partial(n - j, j) == 0.0);

  const Jet2 er = erf(Jet2::lift_s(1.0, 0.0));
  CHECK(er.value() == 0.0);
  CHECK(er.partial(0, 1) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(er.partial(0, 2) == doctest::Approx(0.0));
  // erf''' (0) = -4/sqrt(pi)
  CHECK(er.partial(0, 3) == doctest::Approx(-4.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("transcendental values against the standard library") {
  for (double x : {-0.7, -0.2, 0.1, 0.45, 0.9}) {
    const Jet2 j = Jet2::lift_r(x, 0.0);
    CHECK(oracle::rel_err(exp(j).value(), std::exp(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(atan(j).value(), std::atan(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(atanh(j).value(), std::atanh(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(erf(j).value(), std::erf(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(sin(j).value(), std::sin(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(cos(j).value(), std::cos(x), 1e-300) <= 1e-14);
  }
  for (double x : {0.05, 0.9, 3.0, 40.0}) {
    const Jet2 j = Jet2::lift_r(x, 0.0);
    CHECK(oracle::rel_err(sqrt(j).value(), std::sqrt(x), 1e-300) <= 1e-14);
    CHECK(oracle::rel_err(log(j).value(), std::log(x), 1e-300) <= 1e-14);
  }
}

TEST_CASE("univariate derivative chains against differences") {
  using Fn = Jet2 (*)(const Jet2&);
  const std::vector<std::pair<Fn, double>> cases{
      {[](const Jet2& a) { return sqrt(a); }, 1.3},  {[](const Jet2& a) { return exp(a); }, 0.4},
      {[](const Jet2& a) { return log(a); }, 0.8},   {[](const Jet2& a) { return atan(a); }, -0.6},
      {[](const Jet2& a) { return atanh(a); }, 0.35}, {[](const Jet2& a) { return erf(a); }, 0.7},
      {[](const Jet2& a) { return sin(a); }, 1.1},   {[](const Jet2& a) { return cos(a); }, -0.9},
      {[](const Jet2& a) { return pow(a, 2.5); }, 1.7}};
  for (const auto& [fn, x0] : cases) {
    for (int k = 0; k < Jet2::kMaxOrder; ++k) {
      auto kth = [&](double x) { return fn(Jet2::lift_r(x, 0.0)).partial(k, 0); };
      const double fd = oracle::richardson_d1(kth, x0, 1e-3);
      const double jet = fn(Jet2::lift_r(x0, 0.0)).partial(k + 1, 0);
      CHECK(oracle::rel_err(jet, fd) <= 1e-8);
    }
  }
}

TEST_CASE("domain and division errors") {
  const Jet2 neg = Jet2::lift_r(-1.0, 0.0);
  CHECK_THROWS_AS(sqrt(neg), Error);
  CHECK_THROWS_AS(log(neg), Error);
  CHECK_THROWS_AS(atanh(Jet2::lift_r(1.0, 0.0)), Error);
  try {
    (void)log(Jet2::lift_r(0.0, 0.0));
    FAIL("log(0) accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
  try {
    (void)(Jet2::constant(1.0) / Jet2::constant(1e-15));
    FAIL("division by ~0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionByZeroJet);
  }
  try {
    (void)(Jet2::lift_r(1.0, 0.0) + Jet2::lift_r(2.0, 0.0));
    FAIL("mismatched base points accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BasePointMismatch);
  }
}

TEST_CASE("product of random quadratics matches the convolution") {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const BasePoint at{u(rng), u(rng)};
    // a[i][j] multiplies (r - r0)^i (s - s0)^j, i + j <= 2.
    double a[3][3] = {}, b[3][3] = {};
    Jet2 fa = Jet2::constant(0.0, at), fb = Jet2::constant(0.0, at);
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; i + j <= 2; ++j) {
        a[i][j] = u(rng);
        b[i][j] = u(rng);
        fa.taylor_ref(i, j) = a[i][j];
        fb.taylor_ref(i, j) = b[i][j];
      }
    double c[5][5] = {};
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; i + j <= 2; ++j)
        for (int k = 0; k <= 2; ++k)
          for (int l = 0; k + l <= 2; ++l) c[i + k][j + l] += a[i][j] * b[k][l];
    const Jet2 prod = fa * fb;
    double scale = 0.0;
    for (int n = 0; n <= 4; ++n)
      for (int j = 0; j <= n; ++j) scale = std::max(scale, std::abs(c[n - j][j]));
    for (int n = 0; n <= 4; ++n)
      for (int j = 0; j <= n; ++j) CHECK(std::abs(prod.taylor(n - j, j) - c[n - j][j]) <= 1e-12 * scale);
    // Quotient undoes the product.
    if (std::abs(fb.value()) > 0.1) {
      const Jet2 back = prod / fb;
      for (int n = 0; n <= 2; ++n)
        for (int j = 0; j <= n; ++j) CHECK(std::abs(back.taylor(n - j, j) - a[n - j][j]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("catalog jets against Richardson differences") {
  for (const auto& [id, params] : oracle::closed_form_entries()) {
    const MetricProfile prof = get_entry(id, params).profile;
    const auto e = oracle::jet_difference_error(prof, default_grid(prof.domain()));
    INFO(id << " worst order<=3 " << e.low << " order 4 " << e.top << " near r=" << e.worst_at.r
            << " s=" << e.worst_at.s);
    CHECK(e.low <= 1e-5);
    CHECK(e.top <= 1e-3);
  }
}

}  // TEST_SUITE
