#include <algorithm>
#include <cmath>

#include "ddc/diffusion.hpp"
#include "ddc/errors.hpp"
#include "ddc/levy.hpp"
#include "doctest.h"

using namespace ddc;

TEST_CASE("model registry and flags") {
  const auto e = make_levy_model("exp-subordinator");
  CHECK(e.mean() == doctest::Approx(2.0));
  CHECK(e.subordinator);
  CHECK_FALSE(e.bounded_jumps);
  const auto u = make_levy_model("uniform-subordinator");
  CHECK(u.mean() == doctest::Approx(1.0));
  CHECK(u.bounded_jumps);
  const auto n = make_levy_model("spec-neg");
  CHECK(n.spectrally_negative);
  CHECK_FALSE(n.subordinator);
  CHECK(n.mean() == doctest::Approx(1.0));
  const auto c = make_levy_model("centered-uniform");
  CHECK(c.mean() == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(c.validate(), ModelError);
  CHECK_NOTHROW(c.validate(false));
  CHECK_THROWS_AS(make_levy_model("stable"), ModelError);

  auto lie = e;
  lie.sigma = 0.3;
  CHECK_THROWS_AS(lie.validate(), ModelError);
  auto neg = n;
  neg.jumps.negative = false;
  CHECK_THROWS_AS(neg.validate(), ModelError);
}

TEST_CASE("pure drift path is exact") {
  const auto m = make_levy_model("pure-drift");
  const auto p = simulate_levy_path(m, 2.0, 1e-2, 1);
  CHECK(p.values.back() == 2.0);
  CHECK(p.jump_times.empty());
  const auto o = extract_overshoots(p, 2.0);
  for (double t : linspace(0.0, 2.0, 41)) CHECK(o.at(t) == 0.0);
}

TEST_CASE("Brownian Levy path equals the diffusion recursion") {
  LevySpec s{0.0, 1.0, 0.0, "none", 1.0, false};
  const auto m = make_levy_model("bm", s);
  DiffusionModel d;
  d.drift = [](double) { return 0.0; };
  d.volatility = [](double) { return 1.0; };
  const auto lp = simulate_levy_path(m, 3.0, 1e-3, 5);
  const auto dp = simulate_path(d, 0.0, 3.0, 1e-3, 5);
  CHECK(lp.values == dp.values);
}

TEST_CASE("jump bookkeeping reconstructs the path") {
  const auto m = make_levy_model("exp-subordinator");
  const auto p = simulate_levy_path(m, 50.0, 1e-3, 9);
  REQUIRE(!p.jump_sizes.empty());
  for (std::size_t j = 0; j < p.jump_sizes.size(); ++j) {
    const double post = p.pre_jump[j] + p.jump_sizes[j];
    const bool last_in_step = j + 1 == p.jump_sizes.size() || p.jump_steps[j + 1] != p.jump_steps[j];
    if (last_in_step) CHECK(p.values[p.jump_steps[j] + 1] == post);
    else CHECK(p.pre_jump[j + 1] == post);
    CHECK(p.jump_times[j] > p.jump_steps[j] * p.dt);
    CHECK(p.jump_times[j] <= (p.jump_steps[j] + 1) * p.dt + 1e-12);
  }
  CHECK(simulate_levy_path(m, 50.0, 1e-3, 9).values == p.values);
  CHECK_THROWS(simulate_levy_path(m, 1.0, 1e-2, 9));
}

TEST_CASE("compound Poisson mean") {
  const auto m = make_levy_model("exp-subordinator");
  double s = 0.0, s2 = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const double v = simulate_levy_path(m, 100.0, 1e-3, replicate_seed(300, r)).values.back() / 100.0;
    s += v;
    s2 += v * v;
  }
  const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 2.0) < 3.0 * se);

  RandomStream rng(4);
  double ms = 0.0;
  for (int r = 0; r < 20000; ++r) ms += sample_levy_marginal(m, 10.0, rng);
  CHECK(ms / 20000 / 10.0 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("hand-built overshoot trace") {
  LevyPath p;
  p.dt = 0.5;
  p.values = {0.0, 0.5, 1.5, 2.0};
  p.jump_steps = {1};
  p.jump_times = {1.0};
  p.jump_sizes = {0.5};
  p.pre_jump = {1.0};
  p.horizon = 1.5;
  const auto o = extract_overshoots(p, 2.0);
  CHECK(o.at(1.2) == doctest::Approx(0.3));
  CHECK(o.at(0.7) == 0.0);
  CHECK(o.at(1.0) == doctest::Approx(0.5));
  CHECK(o.at(1.7) == 0.0);
  CHECK_THROWS(extract_overshoots(p, 2.5));
  REQUIRE(o.segments.size() == 3);
  CHECK_FALSE(o.segments[0].sloped);
  CHECK(o.segments[1].sloped);
}

TEST_CASE("spectrally negative paths never overshoot") {
  const auto m = make_levy_model("spec-neg");
  const auto p = simulate_levy_path(m, 200.0, 1e-3, 2);
  const double top = std::max(0.0, *std::max_element(p.values.begin(), p.values.end()));
  const auto o = extract_overshoots(p, top);
  for (const auto& s : o.segments) {
    CHECK_FALSE(s.sloped);
    CHECK(s.start == 0.0);
  }
  const auto law = stationary_overshoot_law(m);
  CHECK(law.atom == 1.0);
  CHECK(law.tail_density(0.3) == 0.0);
}

TEST_CASE("overshoot series of a path followed by its shifted copy") {
  const auto m = make_levy_model("exp-subordinator");
  const auto p = simulate_levy_path(m, 20.0, 1e-3, 6);
  const double end = p.values.back();
  LevyPath twice = p;
  const std::size_t n = p.values.size() - 1;
  for (std::size_t k = 1; k <= n; ++k) twice.values.push_back(end + p.values[k]);
  for (std::size_t j = 0; j < p.jump_sizes.size(); ++j) {
    twice.jump_steps.push_back(p.jump_steps[j] + n);
    twice.jump_times.push_back(p.jump_times[j] + p.horizon);
    twice.jump_sizes.push_back(p.jump_sizes[j]);
    twice.pre_jump.push_back(end + p.pre_jump[j]);
  }
  const auto a = extract_overshoots(p, end);
  const auto b = extract_overshoots(twice, 2 * end);
  for (double t : linspace(0.0, end * 0.999, 500)) {
    CHECK(b.at(t) == doctest::Approx(a.at(t)).epsilon(1e-9));
    CHECK(b.at(t + end) == doctest::Approx(a.at(t)).epsilon(1e-9).scale(1e-9));
  }
}

TEST_CASE("stationary overshoot law closed forms") {
  const auto law = stationary_overshoot_law(make_levy_model("exp-subordinator"));
  CHECK(law.atom == doctest::Approx(0.5));
  CHECK(law.tail_density(0.0) == doctest::Approx(0.5));
  CHECK(law.tail_density(1.0) == doctest::Approx(0.5 * std::exp(-1.0)));
  CHECK(law.cdf(2.0) == doctest::Approx(1.0 - 0.5 * std::exp(-2.0)));
  for (double y = 0.0; y < 5.0; y += 0.1) CHECK(law.tail_density(y + 0.1) <= law.tail_density(y));
  const auto ul = stationary_overshoot_law(make_levy_model("uniform-subordinator"));
  CHECK(ul.cdf(1.0) == doctest::Approx(1.0));
  CHECK(ul.cdf(0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(stationary_overshoot_law(make_levy_model("centered-uniform")), ModelError);
  LevySpec mixed{1.0, 0.5, 1.0, "exponential", 1.0, false};
  CHECK_THROWS_WITH(stationary_overshoot_law(make_levy_model("mixed", mixed)), doctest::Contains("closed form"));
}

TEST_CASE("empirical overshoot distribution") {
  OvershootSeries zero;
  zero.segments = {{0.0, 10.0, 0.0, false}};
  zero.max_level = 10.0;
  const auto f0 = empirical_overshoot_distribution(zero, 10.0);
  CHECK(f0(-1e-9) == 0.0);
  CHECK(f0(0.0) == 1.0);
  CHECK(f0(3.0) == 1.0);

  const auto m = make_levy_model("exp-subordinator");
  const auto p = simulate_levy_path(m, 2700.0, 1e-3, 12);
  const auto series = extract_overshoots(p, 5000.0);
  const auto f = empirical_overshoot_distribution(series, 5000.0);
  double prev = 0.0;
  for (double y : linspace(0.0, 20.0, 400)) {
    CHECK(f(y) >= prev);
    prev = f(y);
  }
  CHECK(f(f.max_value()) == doctest::Approx(1.0));
  CHECK(ks_distance(f, stationary_overshoot_law(m)) < 0.05);
}
