#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ddc/diffusion.hpp"
#include "ddc/kernel_density.hpp"
#include "ddc/singular_control.hpp"

namespace ddc {

/// Exploration/exploitation bits; bit 0 = explore, 1 = exploit. Episode n
/// (1-based) uses bits[n - 1].
struct Schedule {
  std::vector<std::uint8_t> bits;
  double slack = 1.0;

  /// n^{2/3} <= #zeros among the first n <= n^{2/3} + slack for every prefix.
  bool satisfies_invariant() const;
};

/// ceil(n^{2/3}) in exact integer arithmetic.
std::uint64_t ceil_two_thirds(std::uint64_t n);

/// Greedy bit of episode n: explore iff fewer than ceil(n^{2/3}) explorations so far.
std::uint8_t greedy_bit(std::uint64_t n, std::uint64_t zeros_so_far);

Schedule make_schedule(std::size_t n, double slack);

enum class EpisodeKind { explore, exploit };

struct Episode {
  EpisodeKind kind = EpisodeKind::explore;
  double start = 0.0;
  double end = 0.0;
  ThresholdPair thresholds;  // exploit only
  double running_cost = 0.0;
  double control_cost = 0.0;
  bool completed = false;
};

struct ControlSettings {
  double horizon = 1e4;
  double dt = 1e-2;
  std::uint64_t seed = 0;
  double cap_constant = 3.0;  // m in the m T^{2/3} cap on the estimation prefix
  int kernel_order = 2;
  std::size_t threshold_points = 101;
  std::optional<ThresholdPair> pinned;  // bypasses estimation
  std::optional<Schedule> schedule;     // default: greedy schedule
  bool allow_any_schedule = false;      // skip the schedule invariant check
  std::size_t max_exploration_steps = 1'000'000;
  bool keep_exploration_path = false;
};

struct ControlRunReport {
  std::vector<Episode> episodes;
  double horizon = 0.0;
  double explore_time = 0.0;  // S_T
  double exploit_time = 0.0;  // R_T
  std::size_t explore_episodes = 0;
  double total_cost = 0.0;
  std::size_t estimates_computed = 0;
  std::vector<double> exploration_path;  // only with keep_exploration_path
};

/// Alternates exploration and exploitation episodes from x0 = 0 until the
/// horizon, re-estimating the thresholds from the exploration data at each
/// exploitation start.
ControlRunReport run_data_driven_control(const DiffusionModel& model, const CostSpec& cost,
                                         const ControlSettings& settings);

inline double regret_per_time(const ControlRunReport& report, double optimal_value) {
  return report.total_cost / report.horizon - optimal_value;
}

}  // namespace ddc
