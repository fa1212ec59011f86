#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddc/random.hpp"
#include "ddc/singular_control.hpp"
#include "doctest.h"

using namespace ddc;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

double rho_ou(double x) { return std::exp(-x * x) / kSqrtPi; }
double unit_sigma(double) { return 1.0; }

CostSpec quadratic(double q = 0.5, double box = 1.5) {
  CostSpec s;
  s.running_cost = [](double x) { return x * x; };
  s.q_up = s.q_down = q;
  s.box = box;
  s.floor = 0.5 * rho_ou(box);
  return s;
}

// Closed-form OU cost with c(x) = x^2, sigma = 1.
double exact_cost(const CostSpec& s, double xi, double th) {
  auto prim_c = [](double x) { return std::erf(x) / 4.0 - x * std::exp(-x * x) / (2.0 * kSqrtPi); };
  auto prim_m = [](double x) { return std::erf(x) / 2.0; };
  const double num = prim_c(th) - prim_c(xi) + 0.5 * s.q_up * rho_ou(xi) + 0.5 * s.q_down * rho_ou(th);
  return num / (prim_m(th) - prim_m(xi));
}

}  // namespace

TEST_CASE("cost functional regression value and scale invariance") {
  const auto spec = quadratic(1.0);
  const ThresholdPair p{-1.0, 1.0};
  // [int x^2 rho + rho(1)] / int rho with rho = N(0, 1/2): integration by parts gives exactly 1/2.
  CHECK(cost_functional(spec, rho_ou, unit_sigma, p) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cost_functional(spec, [](double x) { return 2.0 * rho_ou(x); }, unit_sigma, p) ==
        doctest::Approx(cost_functional(spec, rho_ou, unit_sigma, p)).epsilon(1e-14));
  CHECK(cost_functional(spec, rho_ou, unit_sigma, {-0.8, 1.3}) == doctest::Approx(exact_cost(spec, -0.8, 1.3)).epsilon(1e-10));
  CHECK_THROWS(cost_functional(spec, rho_ou, unit_sigma, {-0.2, 1.0}));
  CHECK_THROWS_AS(cost_functional(spec, [](double) { return 0.0; }, unit_sigma, p), std::domain_error);
}

TEST_CASE("plug-in cost: floor clamp and consistency") {
  auto spec = quadratic(1.0);
  spec.floor = 0.1;
  FunctionEstimate flat;
  flat.grid = linspace(-2, 2, 401);
  flat.values.assign(flat.grid.size(), spec.floor / 2.0);
  const ThresholdPair p{-1.2, 0.9};
  const double expected = ((0.9 * 0.9 * 0.9 + 1.2 * 1.2 * 1.2) / 3.0 * spec.floor / 2.0 + spec.floor / 2.0) /
                          (spec.floor * (0.9 + 1.2));
  CHECK(estimate_cost(spec, flat, unit_sigma, p) == doctest::Approx(expected).epsilon(1e-10));

  FunctionEstimate exact;
  exact.grid = linspace(-2, 2, 4001);
  for (double x : exact.grid) exact.values.push_back(rho_ou(x));
  spec.floor = 0.05;
  CHECK(std::abs(estimate_cost(spec, exact, unit_sigma, p) - cost_functional(spec, rho_ou, unit_sigma, p)) < 1e-6);

  FunctionEstimate narrow;
  narrow.grid = linspace(-1, 1, 11);
  narrow.values.assign(11, 0.3);
  CHECK_THROWS_AS(estimate_cost(spec, narrow, unit_sigma, p), std::out_of_range);
}

TEST_CASE("plug-in perturbation bound") {
  const auto spec = quadratic(0.5);
  const double b = spec.box, a = spec.floor;
  const double cost_mass = simpson(spec.running_cost, -b, b, 401);
  double num_max = 0.0;
  const auto grid = make_threshold_grid(b, 11);
  for (double xi : grid.lower)
    for (double th : grid.upper)
      num_max = std::max(num_max, simpson([&](double x) { return x * x * rho_ou(x); }, xi, th, 401) +
                                      0.25 * (rho_ou(xi) + rho_ou(th)));
  const double m_const = (cost_mass + (spec.q_up + spec.q_down) / 2.0) * (b / (2 * a)) + num_max * 2 * b * std::pow(b / (2 * a), 2);

  RandomStream rng(8);
  FunctionEstimate est;
  est.grid = linspace(-b, b, 601);
  for (int trial = 0; trial < 20; ++trial) {
    const double f1 = 1 + 6 * rng.uniform(), ph = 6.3 * rng.uniform();
    est.values.clear();
    double sup = 0.0;
    for (double x : est.grid) {
      const double d = 0.01 * std::sin(f1 * x + ph);
      est.values.push_back(rho_ou(x) + d);
      sup = std::max(sup, std::abs(d));
    }
    for (double xi : grid.lower)
      for (double th : grid.upper) {
        const double diff = std::abs(estimate_cost(spec, est, unit_sigma, {xi, th}) - cost_functional(spec, rho_ou, unit_sigma, {xi, th}));
        CHECK(diff <= m_const * sup);
      }
  }
}

TEST_CASE("grid search tie-break and symmetry") {
  const auto grid = make_threshold_grid(1.5, 101);
  for (std::size_t i = 0; i < 101; ++i) CHECK(grid.lower[i] == -grid.upper[100 - i]);
  const auto flat = grid_argmin(grid, [](std::size_t, std::size_t) { return 3.0; });
  CHECK(flat.pair.lower == -1.5);
  CHECK(flat.pair.upper == doctest::Approx(1.0 / 1.5));

  for (double q : {0.25, 0.5, 1.0}) {
    for (double box : {1.5, 2.0}) {
      const auto best = optimize_thresholds(quadratic(q, box), rho_ou, unit_sigma);
      CHECK(best.pair.lower == -best.pair.upper);
    }
  }
}

TEST_CASE("surface agrees with the 401-point functional") {
  const auto spec = quadratic(0.5);
  const CostSurface surf(spec, rho_ou, unit_sigma, make_threshold_grid(spec.box, 101), DensityMode::oracle);
  for (std::size_t i = 0; i < 101; i += 20)
    for (std::size_t j = 0; j < 101; j += 25)
      CHECK(surf(i, j) == doctest::Approx(cost_functional(spec, rho_ou, unit_sigma, {surf.grid().lower[i], surf.grid().upper[j]})).epsilon(1e-10));
}

TEST_CASE("OU argmin matches the dense closed-form oracle") {
  for (double q : {0.25, 0.5, 1.0}) {
    const auto spec = quadratic(q);
    const auto best = optimize_thresholds(spec, rho_ou, unit_sigma);
    const auto dense = make_threshold_grid(spec.box, 501);
    const auto oracle = grid_argmin(dense, [&](std::size_t i, std::size_t j) { return exact_cost(spec, dense.lower[i], dense.upper[j]); });
    const double cell = (spec.box - 1.0 / spec.box) / 100.0;
    CHECK(std::abs(best.pair.lower - oracle.pair.lower) <= cell + 1e-12);
    CHECK(std::abs(best.pair.upper - oracle.pair.upper) <= cell + 1e-12);
    CHECK(best.value == doctest::Approx(oracle.value).epsilon(1e-4));
  }
  const auto model = make_diffusion_model("ou", DiffusionSpec{});
  CHECK(value(quadratic(0.5), model) == doctest::Approx(optimize_thresholds(quadratic(0.5), rho_ou, unit_sigma).value).epsilon(1e-8));
}

TEST_CASE("argmin is invariant to density scale and value is monotone in q_up") {
  const auto spec = quadratic(0.5);
  const auto base = optimize_thresholds(spec, rho_ou, unit_sigma);
  const auto scaled = optimize_thresholds(spec, [](double x) { return 3.0 * rho_ou(x); }, unit_sigma);
  CHECK(base.i == scaled.i);
  CHECK(base.j == scaled.j);
  CHECK(base.value == doctest::Approx(scaled.value).epsilon(1e-12));

  double previous = 0.0;
  for (double q : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    auto s = spec;
    s.q_up = q;
    const double v = optimize_thresholds(s, rho_ou, unit_sigma).value;
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("plug-in regret is bounded by twice the uniform cost error") {
  const auto spec = quadratic(0.5);
  const auto grid = make_threshold_grid(spec.box, 101);
  const CostSurface truth(spec, rho_ou, unit_sigma, grid, DensityMode::oracle);
  const double v = optimize_thresholds(truth).value;
  RandomStream rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double amp = 0.05 * rng.uniform(), f = 1 + 5 * rng.uniform(), ph = 6.3 * rng.uniform();
    const CostSurface plug(spec, [&](double x) { return rho_ou(x) * (1 + amp * std::sin(f * x + ph)); }, unit_sigma, grid, DensityMode::plugin);
    const auto hat = optimize_thresholds(plug);
    double sup = 0.0;
    for (std::size_t i = 0; i < 101; ++i)
      for (std::size_t j = 0; j < 101; ++j) sup = std::max(sup, std::abs(truth(i, j) - plug(i, j)));
    CHECK(truth(hat.i, hat.j) - v <= 2.0 * sup);
  }
}

TEST_CASE("floor default and spec validation") {
  const auto model = make_diffusion_model("ou", DiffusionSpec{});
  const InvariantDensity rho(model);
  CHECK(default_floor(rho, 1.5) == doctest::Approx(0.5 * rho_ou(1.5)).epsilon(1e-9));
  auto bad = quadratic();
  bad.box = 0.9;
  CHECK_THROWS(bad.validate());
  bad = quadratic();
  bad.running_cost = [](double x) { return (x - 1) * (x - 1); };
  CHECK_THROWS(bad.validate());
  CHECK_NOTHROW(quadratic().validate());
}
