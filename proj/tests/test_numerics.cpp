// Unit tests for the numerics module: normal distribution functions,
// Gauss-Kronrod quadrature, Brent root finding and Nelder-Mead.
//
// Reference values were computed with mpmath at 40 digits.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sigfdr/models.hpp"
#include "sigfdr/numerics.hpp"

using namespace sigfdr;

TEST_CASE("norm_cdf reference values") {
  CHECK(norm_cdf(0.0) == 0.5);
  CHECK(std::abs(norm_cdf(1.96) - 0.975002104851779564) <= 1e-12);
  CHECK(std::abs(norm_cdf(0.862) - 0.805656241083775922) <= 1e-12);
  CHECK(std::abs(norm_cdf(-1.96) - (1.0 - 0.975002104851779564)) <= 1e-12);
  CHECK_THROWS_AS(norm_cdf(std::nan("")), DomainError);
  CHECK_THROWS_AS(norm_cdf(kInf), DomainError);
}

TEST_CASE("norm_cdf is monotone and inside (0, 1)") {
  double prev = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double p = norm_cdf(x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("log_norm_sf matches the far tail") {
  const std::vector<std::pair<double, double>> ref = {
      {5.0, -15.064998393988725736},
      {20.0, -203.91715537109726394},
      {34.99, -616.62486597159115706},
      {35.0, -616.97510126192251347},
      {40.0, -804.60844201375378817},
      {200.0, -20006.217280898190402}};
  for (const auto& [x, expected] : ref) {
    CAPTURE(x);
    CHECK(std::abs(log_norm_sf(x) - expected) <= 1e-12 * std::abs(expected));
  }
  CHECK(std::abs(log_norm_sf(-3.0) - std::log(norm_cdf(3.0))) < 1e-15);
}

TEST_CASE("norm_quantile inverts norm_cdf") {
  CHECK(norm_quantile(0.5) == 0.0);
  CHECK(std::abs(norm_quantile(0.9750021) - 1.96) <= 1e-6);
  CHECK(std::abs(norm_quantile(0.9750021) - 1.95999991697979513) <= 1e-12);
  CHECK(std::abs(norm_quantile(0.80566) - 0.862) <= 1e-4);
  CHECK_THROWS_AS(norm_quantile(0.0), DomainError);
  CHECK_THROWS_AS(norm_quantile(1.0), DomainError);
  CHECK_THROWS_AS(norm_quantile(-0.1), DomainError);

  for (int i = 1; i <= 999; ++i) {
    const double p = i / 1000.0;
    CAPTURE(p);
    CHECK(std::abs(norm_cdf(norm_quantile(p)) - p) <= 1e-9);
    CHECK(std::abs(norm_cdf(norm_quantile(p)) - p) <= 1e-10);
  }
}

TEST_CASE("norm_isf keeps relative accuracy in the upper tail") {
  for (double q : {1e-300, 1e-100, 1e-20, 1e-8, 0.01, 0.3, 0.5, 0.9}) {
    CAPTURE(q);
    const double x = norm_isf(q);
    CHECK(std::abs(norm_sf(x) - q) <= 1e-12 * q);
  }
}

TEST_CASE("integrate: constants and densities") {
  CHECK(std::abs(integrate([](double) { return 1.0; }, 0.0, 1.0) - 1.0) <=
        1e-14);
  const double half_normal =
      integrate([](double y) { return kSqrt2OverPi * std::exp(-0.5 * y * y); },
                0.0, kInf);
  CHECK(std::abs(half_normal - 1.0) <= 1e-8);
  CHECK(integrate([](double) { return 3.0; }, 2.0, 2.0) == 0.0);
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 1.0, 0.0), DomainError);
}

TEST_CASE("integrate: BUM null over threshold curve gives 1/s") {
  // The mass of (1-y)^(a-1) sits within 1e-300 of y = 1, so integrate over
  // u = -log(1 - y) on [0, inf) with dy = exp(-u) du.
  const ThresholdModel model = BumModel(0.8);
  const QuadratureSpec tight{1e-12, 1e-12, 50};
  const double value = integrate(
      [&](double u) {
        const NativeStat stat{-std::expm1(-u), -u};
        return std::exp(-u - log_local_fdr(model, stat));
      },
      0.0, kInf, tight);
  CHECK(std::abs(value - 1.25) <= 1e-8);
}

TEST_CASE("integrate is exact on cubics per panel") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double c0 = coef(gen), c1 = coef(gen), c2 = coef(gen), c3 = coef(gen);
    const double a = coef(gen);
    const double b = a + std::abs(coef(gen)) + 0.1;
    auto poly = [=](double x) { return c0 + x * (c1 + x * (c2 + x * c3)); };
    auto prim = [=](double x) {
      return x * (c0 + x * (c1 / 2 + x * (c2 / 3 + x * c3 / 4)));
    };
    const double exact = prim(b) - prim(a);
    CHECK(std::abs(integrate(poly, a, b) - exact) <= 1e-12 * (1.0 + std::abs(exact)));
  }
}

TEST_CASE("integrate reports depth exhaustion with the best estimate") {
  auto step = [](double x) { return x < 0.3 ? 0.0 : 1.0; };
  const QuadratureSpec shallow{1e-14, 1e-14, 3};
  try {
    integrate(step, 0.0, 1.0, shallow);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::abs(e.best_estimate() - 0.7) < 0.05);
  }
  CHECK_THROWS_AS(integrate(step, 0.0, 1.0, QuadratureSpec{0.0, 1e-8, 5}),
                  DomainError);
}

TEST_CASE("brent_root") {
  CHECK(std::abs(brent_root([](double x) { return x * x - 2.0; }, 0.0, 2.0) -
                 1.4142135623730951) <= 1e-12);
  CHECK(std::abs(brent_root([](double x) { return norm_cdf(x) - 0.5; }, -1.0,
                            1.0)) <= 1e-12);
  const double s = brent_root(
      [](double t) { return hnd_eta0_from_s(t) - 0.8; }, 1e-4, 10.0);
  CHECK(std::abs(s - 0.862) <= 1e-3);
  CHECK_THROWS_AS(brent_root([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                  BracketError);
}

TEST_CASE("brent_root stays inside the bracket") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r1 = u(gen), r2 = u(gen), r3 = u(gen);
    auto f = [=](double x) { return (x - r1) * (x - r2) * (x - r3); };
    const double lo = u(gen);
    const double hi = lo + std::abs(u(gen)) + 0.01;
    if (f(lo) * f(hi) > 0.0) continue;
    const double root = brent_root(f, lo, hi);
    CHECK(root >= lo);
    CHECK(root <= hi);
    CHECK(std::abs(f(root)) <= 1e-9);
  }
}

TEST_CASE("nelder_mead: smooth and nonsmooth minima") {
  auto bowl = [](std::span<const double> x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
  };
  const std::vector<double> x0 = {0.0, 0.0};
  const OptimizeResult r = nelder_mead(bowl, x0);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) <= 1e-6);
  CHECK(std::abs(r.x[1] - 2.0) <= 1e-6);

  auto vee = [](std::span<const double> x) { return std::abs(x[0]) + 1.0; };
  const std::vector<double> five = {5.0};
  const OptimizeResult v = nelder_mead(vee, five);
  CHECK(std::abs(v.x[0]) <= 1e-4);
  CHECK(std::abs(v.value - 1.0) <= 1e-4);
}

TEST_CASE("nelder_mead is deterministic and reports exhaustion") {
  auto rosen = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const std::vector<double> x0 = {-1.2, 1.0};
  const OptimizeResult a = nelder_mead(rosen, x0);
  const OptimizeResult b = nelder_mead(rosen, x0);
  CHECK(a.x == b.x);
  CHECK(a.value == b.value);
  CHECK(std::abs(a.x[0] - 1.0) < 1e-4);

  OptimizerSpec tiny;
  tiny.max_iter = 5;
  tiny.restarts = 0;
  const OptimizeResult c = nelder_mead(rosen, x0, tiny);
  CHECK_FALSE(c.converged);
  CHECK(c.value <= rosen(x0));

  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return kInf; }, x0),
                  DomainError);
}
