#include <algorithm>
#include <cmath>

#include "ddc/errors.hpp"
#include "ddc/exploration.hpp"
#include "ddc/random.hpp"
#include "doctest.h"

using namespace ddc;

namespace {

DiffusionModel ou() { return make_diffusion_model("ou", DiffusionSpec{}); }

CostSpec cost_spec() {
  CostSpec c;
  c.running_cost = [](double x) { return x * x; };
  c.q_up = c.q_down = 0.5;
  c.box = 1.5;
  c.floor = 0.5 * std::exp(-2.25) / std::sqrt(M_PI);
  return c;
}

std::size_t zeros_in(const Schedule& s, std::size_t n) {
  return static_cast<std::size_t>(std::count(s.bits.begin(), s.bits.begin() + static_cast<long>(n), 0));
}

}  // namespace

TEST_CASE("integer ceiling of n^(2/3)") {
  CHECK(ceil_two_thirds(1) == 1);
  CHECK(ceil_two_thirds(2) == 2);
  CHECK(ceil_two_thirds(8) == 4);
  CHECK(ceil_two_thirds(27) == 9);
  CHECK(ceil_two_thirds(28) == 10);
  CHECK(ceil_two_thirds(1000000) == 10000);
  for (std::uint64_t n = 1; n < 5000; ++n) {
    const auto z = ceil_two_thirds(n);
    CHECK(z * z * z >= n * n);
    CHECK((z - 1) * (z - 1) * (z - 1) < n * n);
  }
}

TEST_CASE("greedy schedule") {
  CHECK(make_schedule(1, 1.0).bits[0] == 0);
  const auto eight = make_schedule(8, 1.0);
  CHECK(zeros_in(eight, 8) >= 4);
  CHECK(zeros_in(eight, 8) <= 5);
  const auto s = make_schedule(1000, 1.0);
  CHECK(s.satisfies_invariant());
  for (std::size_t n = 1; n <= 1000; ++n) {
    const double z = static_cast<double>(zeros_in(s, n));
    const double target = std::pow(static_cast<double>(n), 2.0 / 3.0);
    CHECK(z >= target - 1e-9);
    CHECK(z <= target + 1.0 + 1e-9);
  }
  Schedule ones{std::vector<std::uint8_t>(10, 1), 1.0};
  CHECK_FALSE(ones.satisfies_invariant());
  Schedule zeros{std::vector<std::uint8_t>(10, 0), 1.0};
  CHECK_FALSE(zeros.satisfies_invariant());
  CHECK_THROWS(make_schedule(0, 1.0));
  CHECK_THROWS(make_schedule(5, 0.5));
}

TEST_CASE("all-exploration run is the uncontrolled path") {
  ControlSettings s;
  s.horizon = 5000.0;
  s.seed = 17;
  s.schedule = Schedule{std::vector<std::uint8_t>(100000, 0), 1.0};
  s.allow_any_schedule = true;
  const auto rep = run_data_driven_control(ou(), cost_spec(), s);
  CHECK(rep.exploit_time == 0.0);
  CHECK(rep.explore_time == doctest::Approx(5000.0));
  const auto path = simulate_path(ou(), 0.0, 5000.0, 1e-2, 17);
  double integral = 0.0;
  for (double v : riemann_samples(path)) integral += v * v * 1e-2;
  CHECK(rep.total_cost == doctest::Approx(integral).epsilon(1e-10));

  s.allow_any_schedule = false;
  CHECK_THROWS(run_data_driven_control(ou(), cost_spec(), s));
}

TEST_CASE("episode bookkeeping") {
  ControlSettings s;
  s.horizon = 8000.0;
  s.seed = 3;
  s.cap_constant = 3.2;
  const auto rep = run_data_driven_control(ou(), cost_spec(), s);
  CHECK(rep.explore_time + rep.exploit_time == doctest::Approx(8000.0).epsilon(1e-12));
  double last = 0.0, total = 0.0;
  std::uint64_t zeros = 0;
  for (std::size_t n = 0; n < rep.episodes.size(); ++n) {
    const auto& e = rep.episodes[n];
    CHECK(e.start == doctest::Approx(last));
    CHECK(e.end > e.start);
    last = e.end;
    total += e.running_cost + e.control_cost;
    const auto bit = greedy_bit(n + 1, zeros);
    CHECK((e.kind == EpisodeKind::explore) == (bit == 0));
    zeros += bit == 0;
    if (n + 1 < rep.episodes.size()) CHECK(e.completed);
    if (e.kind == EpisodeKind::exploit) {
      CHECK(e.thresholds.lower <= -1.0 / 1.5);
      CHECK(e.thresholds.upper >= 1.0 / 1.5);
      if (e.completed) CHECK(e.control_cost > 0.0);
    }
  }
  CHECK(last == doctest::Approx(8000.0));
  CHECK(total == doctest::Approx(rep.total_cost));
  CHECK(rep.explore_episodes == zeros);
  CHECK(rep.estimates_computed >= 1);
  CHECK(rep.estimates_computed <= rep.explore_episodes);
  CHECK(regret_per_time(rep, rep.total_cost / rep.horizon) == doctest::Approx(0.0));
}

TEST_CASE("exploration step cap is enforced") {
  ControlSettings s;
  s.horizon = 5000.0;
  s.max_exploration_steps = 100;
  CHECK_THROWS_AS(run_data_driven_control(ou(), cost_spec(), s), SimulationError);
  s.horizon = 100.0;
  s.max_exploration_steps = 1'000'000;
  CHECK_THROWS(run_data_driven_control(ou(), cost_spec(), s));
}

TEST_CASE("pinned oracle thresholds earn the optimal value") {
  const auto model = ou();
  const auto cost = cost_spec();
  const InvariantDensity rho(model);
  const auto best = optimize_thresholds(cost, [&](double x) { return rho(x); }, model.volatility);
  double acc = 0.0;
  const int seeds = 50;
  for (int r = 0; r < seeds; ++r) {
    ControlSettings s;
    s.horizon = 20000.0;
    s.seed = replicate_seed(4000, r);
    s.pinned = best.pair;
    const auto rep = run_data_driven_control(model, cost, s);
    double exploit_cost = 0.0;
    for (const auto& e : rep.episodes)
      if (e.kind == EpisodeKind::exploit) exploit_cost += e.running_cost + e.control_cost;
    acc += exploit_cost / rep.exploit_time;
  }
  CHECK(std::abs(acc / seeds - best.value) < 0.05);
}

TEST_CASE("concatenated exploration path has the uncontrolled occupation law") {
  ControlSettings s;
  s.horizon = 30000.0;
  s.seed = 44;
  s.keep_exploration_path = true;
  const auto rep = run_data_driven_control(ou(), cost_spec(), s);
  const std::size_t n = 500000;  // 5000 time units
  REQUIRE(rep.exploration_path.size() >= n);
  std::vector<double> explored(rep.exploration_path.begin(), rep.exploration_path.begin() + n);
  auto free = simulate_path(ou(), 0.0, 5000.0, 1e-2, 45).values;
  free.pop_back();
  std::sort(explored.begin(), explored.end());
  std::sort(free.begin(), free.end());
  double ks = 0.0;
  for (double y : linspace(-3.0, 3.0, 601)) {
    const double a = static_cast<double>(std::upper_bound(explored.begin(), explored.end(), y) - explored.begin()) / n;
    const double b = static_cast<double>(std::upper_bound(free.begin(), free.end(), y) - free.begin()) / free.size();
    ks = std::max(ks, std::abs(a - b));
  }
  CHECK(ks < 0.05);
}
