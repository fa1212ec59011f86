#include "ddc/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddc/errors.hpp"
#include "ddc/random.hpp"

namespace ddc {

std::uint64_t ceil_two_thirds(std::uint64_t n) {
  const std::uint64_t target = n * n;
  auto z = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(target)));
  while (z > 0 && (z - 1) * (z - 1) * (z - 1) >= target) --z;
  while (z * z * z < target) ++z;
  return z;
}

std::uint8_t greedy_bit(std::uint64_t n, std::uint64_t zeros_so_far) {
  return zeros_so_far < ceil_two_thirds(n) ? 0 : 1;
}

Schedule make_schedule(std::size_t n, double slack) {
  if (n < 1) throw std::invalid_argument("schedule needs at least one episode");
  if (!(slack >= 1.0)) throw std::invalid_argument("schedule slack must be at least 1");
  Schedule s;
  s.slack = slack;
  s.bits.reserve(n);
  std::uint64_t zeros = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const auto bit = greedy_bit(k, zeros);
    zeros += bit == 0;
    s.bits.push_back(bit);
  }
  return s;
}

bool Schedule::satisfies_invariant() const {
  std::uint64_t zeros = 0;
  for (std::uint64_t n = 1; n <= bits.size(); ++n) {
    zeros += bits[n - 1] == 0;
    if (zeros * zeros * zeros < n * n) return false;
    const long double excess = static_cast<long double>(zeros) - slack;
    if (excess > 0 && excess * excess * excess > static_cast<long double>(n) * n) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

// Incrementally binned exploration samples feeding the threshold estimate.
class ThresholdEstimator {
 public:
  ThresholdEstimator(const CostSpec& cost, const ScalarFn& sigma, int order, std::size_t points)
      : cost_(cost),
        sigma_(sigma),
        kernel_(make_order_kernel(order)),
        grid_(make_threshold_grid(cost.box, points)),
        bins_(-cost.box - reach(), cost.box + reach(), 1.0 / 2048.0, kernel_.degree(), 1024) {}

  void add(double x) { bins_.add(x); }
  std::size_t size() const { return bins_.count(); }

  ThresholdPair estimate(double dt) {
    const double prefix_time = static_cast<double>(bins_.count()) * dt;
    const double h = bandwidth_formula(std::max(prefix_time, std::exp(4.0)));
    const double scale = 1.0 / (static_cast<double>(bins_.count()) * h);
    const ScalarFn rho_hat = [&](double x) { return bins_.kernel_sum(kernel_, h, x) * scale; };
    return optimize_thresholds(CostSurface(cost_, rho_hat, sigma_, grid_, DensityMode::plugin)).pair;
  }

 private:
  // Largest kernel half-width the bandwidth rule can produce, plus margin.
  static double reach() { return 0.5 * bandwidth_formula(std::exp(4.0)) + 0.05; }

  const CostSpec& cost_;
  const ScalarFn& sigma_;
  KernelSpec kernel_;
  ThresholdGrid grid_;
  BinnedSamples bins_;
};

}  // namespace

ControlRunReport run_data_driven_control(const DiffusionModel& model, const CostSpec& cost,
                                         const ControlSettings& settings) {
  cost.validate();
  const double dt = settings.dt;
  const double T = settings.horizon;
  if (!(T >= min_horizon())) throw std::invalid_argument("control horizon below the bandwidth rule minimum");
  if (settings.schedule && !settings.allow_any_schedule && !settings.schedule->satisfies_invariant())
    throw std::invalid_argument("schedule violates the exploration-count invariant");

  const std::size_t total_steps = step_count(T, dt);
  const auto cap_samples = static_cast<std::size_t>(std::floor(settings.cap_constant * std::pow(T, 2.0 / 3.0) / dt));
  const double box = cost.box;
  const double sq = std::sqrt(dt);
  RandomStream rng(settings.seed);
  ThresholdEstimator estimator(cost, model.volatility, settings.kernel_order, settings.threshold_points);

  ControlRunReport rep;
  rep.horizon = static_cast<double>(total_steps) * dt;
  std::size_t step = 0, explore_steps = 0, exploit_steps = 0, zeros = 0;
  std::size_t cached_prefix = 0;
  ThresholdPair current{-box, box};
  double x = 0.0;

  auto euler = [&](double v) { return v + model.drift(v) * dt + model.volatility(v) * sq * rng.normal(); };

  for (std::uint64_t n = 1; step < total_steps; ++n) {
    std::uint8_t bit;
    if (settings.schedule) {
      if (n > settings.schedule->bits.size()) throw std::runtime_error("configured schedule is shorter than the run");
      bit = settings.schedule->bits[n - 1];
    } else {
      bit = greedy_bit(n, zeros);
    }
    Episode ep;
    ep.start = static_cast<double>(step) * dt;

    if (bit == 0) {
      ++zeros;
      ++rep.explore_episodes;
      ep.kind = EpisodeKind::explore;
      bool low = false, high = false;
      std::size_t local = 0;
      while (step < total_steps) {
        if (estimator.size() < cap_samples) estimator.add(x);
        if (settings.keep_exploration_path) rep.exploration_path.push_back(x);
        ep.running_cost += cost.running_cost(x) * dt;
        const double next = euler(x);
        ++step;
        ++explore_steps;
        if (!std::isfinite(next)) throw SimulationError("non-finite state in exploration", step);
        if (++local > settings.max_exploration_steps)
          throw SimulationError("exploration episode exceeded the step cap (check ergodicity)", step);
        const bool done = low && high && crosses(x, next, 0.0, Crossing::either);
        low = low || next <= -box;
        high = high || next >= box;
        x = next;
        if (done) {
          ep.completed = true;
          break;
        }
      }
    } else {
      ep.kind = EpisodeKind::exploit;
      if (settings.pinned) {
        current = *settings.pinned;
      } else {
        const std::size_t prefix = std::min(estimator.size(), cap_samples);
        if (prefix > 0 && prefix != cached_prefix) {
          current = estimator.estimate(dt);
          cached_prefix = prefix;
          ++rep.estimates_computed;
        }
      }
      ep.thresholds = current;
      const double lo = current.lower, hi = current.upper;
      bool pushed_up = false, pushed_down = false;
      auto project = [&](double v) {
        if (v < lo) {
          ep.control_cost += cost.q_up * (lo - v);
          pushed_up = true;
          return lo;
        }
        if (v > hi) {
          ep.control_cost += cost.q_down * (v - hi);
          pushed_down = true;
          return hi;
        }
        return v;
      };
      x = project(x);
      while (step < total_steps) {
        ep.running_cost += cost.running_cost(x) * dt;
        const bool both = pushed_up && pushed_down;
        const double free = euler(x);
        ++step;
        ++exploit_steps;
        if (!std::isfinite(free)) throw SimulationError("non-finite state in exploitation", step);
        const double next = project(free);
        const bool done = both && crosses(x, next, 0.0, Crossing::either);
        x = next;
        if (done) {
          ep.completed = true;
          break;
        }
      }
    }
    ep.end = static_cast<double>(step) * dt;
    rep.total_cost += ep.running_cost + ep.control_cost;
    rep.episodes.push_back(ep);
  }
  rep.explore_time = static_cast<double>(explore_steps) * dt;
  rep.exploit_time = static_cast<double>(exploit_steps) * dt;
  return rep;
}

}  // namespace ddc
