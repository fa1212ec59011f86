#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ddc/random.hpp"

namespace ddc {

enum class JumpKind { none, exponential, uniform, point };

/// Jump size law: magnitude ~ exponential(rate) | uniform(0, c] | point mass at c,
/// with an optional negative sign.
struct JumpLaw {
  JumpKind kind = JumpKind::none;
  double parameter = 1.0;  // lambda for exponential, c otherwise
  bool negative = false;

  double sign() const { return negative ? -1.0 : 1.0; }
  double mean() const;                 // signed E[J]
  double second_moment() const;        // E[J^2]
  double magnitude_tail(double y) const;  // P(|J| > y), y >= 0
  double magnitude_density(double y) const;  // density of |J| (0 for the point mass)
  bool bounded() const { return kind != JumpKind::exponential; }
  /// Magnitude beyond which the tail drops below 1e-12 (the support end if bounded).
  double truncation() const;
  double sample(RandomStream& rng) const;
};

/// X_t = a t + sigma W_t + compound Poisson(rate, jumps).
struct LevyModel {
  std::string name;
  double drift = 0.0;
  double sigma = 0.0;
  double rate = 0.0;
  JumpLaw jumps;
  bool subordinator = false;
  bool spectrally_negative = false;
  bool bounded_jumps = false;

  double mean() const { return drift + rate * jumps.mean(); }  // eta
  /// Checks the declared flags against the triplet. With require_positive_mean
  /// also checks eta > 0 and upward regularity.
  void validate(bool require_positive_mean = true) const;
  bool has_ladder_oracle() const { return subordinator || spectrally_negative; }
};

struct LevySpec {
  double drift = 1.0;
  double sigma = 0.0;
  double rate = 1.0;
  std::string jump_law = "exponential";  // exponential | uniform | point | none
  double jump_parameter = 1.0;
  bool negative_jumps = false;
};

/// Registry: exp-subordinator, uniform-subordinator, spec-neg, centered-uniform,
/// pure-drift, or "custom" built from `spec`. Flags are derived from the triplet.
LevyModel make_levy_model(const std::string& name, const LevySpec& spec);
LevyModel make_levy_model(const std::string& name);

struct LevyPath {
  double dt = 0.0;
  std::vector<double> values;         // state at k dt
  std::vector<std::size_t> jump_steps;  // jump applied at the end of step k -> k+1
  std::vector<double> jump_times;
  std::vector<double> jump_sizes;
  std::vector<double> pre_jump;       // state immediately before each jump
  std::uint64_t seed = 0;
  double horizon = 0.0;
};

/// Gaussian and drift increments per step; compound Poisson arrivals at
/// exact times from a separate stream, applied at the end of their step.
LevyPath simulate_levy_path(const LevyModel& model, double horizon, double dt, std::uint64_t seed);

/// Exact draw of X_T.
double sample_levy_marginal(const LevyModel& model, double horizon, RandomStream& rng);

/// Overshoot over levels in [0, max_level]. Segment k covers [lo, hi) and has
/// O_t = start - (t - lo) if sloped (a jump overshoot) or O_t = start if flat.
struct OvershootSegment {
  double lo = 0.0;
  double hi = 0.0;
  double start = 0.0;
  bool sloped = false;
};

struct OvershootSeries {
  std::vector<OvershootSegment> segments;
  double terminal = 0.0;   // X_T
  double max_level = 0.0;  // levels covered

  double at(double level) const;
};

/// Sweeps the running maximum; creeping advances contribute zero overshoot,
/// jumps across the maximum contribute hi - t.
OvershootSeries extract_overshoots(const LevyPath& path, double max_level);

/// Stationary overshoot law mu = (d_H delta_0 + Pi_H(y, inf) dy) / eta.
struct OvershootLaw {
  double atom = 1.0;
  std::function<double(double)> tail_density;
  std::function<double(double)> cdf;
};

OvershootLaw stationary_overshoot_law(const LevyModel& model);

/// Level-occupation distribution of the overshoot over [0, S].
class EmpiricalOvershootCdf {
 public:
  EmpiricalOvershootCdf(const OvershootSeries& series, double level);

  double operator()(double y) const;
  /// Points where the CDF changes slope.
  std::vector<double> breakpoints() const;
  double level() const { return level_; }
  double max_value() const;

 private:
  double level_;
  double flat_zero_ = 0.0;  // level measure with O = 0
  struct Piece {
    double lo, hi;  // overshoot value range covered with unit density (sloped)
  };
  std::vector<Piece> sloped_;
  std::vector<std::pair<double, double>> flat_;  // (value, length) for flat nonzero pieces
};

EmpiricalOvershootCdf empirical_overshoot_distribution(const OvershootSeries& series, double level);

/// sup_y |F_hat(y) - F(y)| over breakpoints and a dense grid.
double ks_distance(const EmpiricalOvershootCdf& empirical, const OvershootLaw& law, std::size_t grid_points = 2000);

}  // namespace ddc
