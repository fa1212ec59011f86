#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddc/kernel_density.hpp"
#include "ddc/levy.hpp"
#include "ddc/quadrature.hpp"

namespace ddc {

/// Nondecreasing C^2 reward gamma with its derivative, a bound on |gamma'|
/// and the search domain D = (lo, hi).
struct RewardSpec {
  std::string name;
  ScalarFn gamma;
  ScalarFn gamma_prime;
  double derivative_bound = 1.0;
  double domain_lo = -1.0;
  double domain_hi = 1.0;

  void validate() const;
};

/// tanh((x - centre)/scale) or the logistic CDF with the same centre and scale.
RewardSpec make_reward(const std::string& name, double centre, double scale, double domain_lo, double domain_hi);

/// The two displayed forms of the ladder-height generator functional at x:
/// d_H gamma'(x) + int (gamma(x+y) - gamma(x)) Pi_H(dy), and int eta gamma'(x+y) mu(dy).
struct GeneratorForms {
  double generator = 0.0;
  double overshoot = 0.0;
};

GeneratorForms generator_functional_forms(const LevyModel& model, const RewardSpec& reward, double x);

/// A_H gamma(x); throws if the two forms disagree by more than 1e-8.
double generator_functional(const LevyModel& model, const RewardSpec& reward, double x);

/// f_tilde_S(x) = (1/S) int_0^S eta gamma'(x + O_t) dt, exact on the segments.
FunctionEstimate overshoot_estimator_level(const OvershootSeries& series, const RewardSpec& reward, double eta,
                                           double level, std::span<const double> grid);

/// f_hat_T: the level estimator at S = X_T when X_T > 0, the zero function otherwise.
FunctionEstimate overshoot_estimator_time(const LevyPath& path, const RewardSpec& reward, double eta,
                                          std::span<const double> grid);

/// X_T / T, for sensitivity runs with an estimated mean.
double plugin_mean(const LevyPath& path);

struct TailBoundRow {
  double horizon = 0.0;
  double threshold = 0.0;
  double frequency = 0.0;
  double bound = 0.0;   // 2 T^{-p/2}
  double stderr_ = 0.0; // Monte Carlo standard error at the bound probability
  bool within = false;  // frequency <= bound + 3 stderr
};

struct TailBoundReport {
  double beta = 0.0;
  double p = 0.0;
  std::vector<TailBoundRow> rows;
};

/// Exceedance frequency of |X_T| > sqrt(beta T log T^p), beta = sigma^2 + r E[J^2].
TailBoundReport tail_bound_check(const LevyModel& model, double p, std::span<const double> horizons,
                                 std::size_t replicates, std::uint64_t seed);

struct BoundaryChoice {
  double theta = 0.0;
  double value = 0.0;
  std::size_t index = 0;
};

/// Grid argmax with the smallest index on ties.
BoundaryChoice optimize_boundary(const FunctionEstimate& estimate);

/// Generator functional tabulated on a grid over D, with its maximum.
struct LevyOracle {
  FunctionEstimate f;
  BoundaryChoice best;
};

LevyOracle levy_oracle(const LevyModel& model, const RewardSpec& reward, std::span<const double> grid);

/// v - f(theta_hat), theta_hat a grid point of the oracle table.
double levy_regret(const LevyOracle& oracle, double theta_hat);

/// True when the tabulated oracle is strictly unimodal on its grid.
bool unimodal(const FunctionEstimate& f);

struct SsValue {
  double value = 0.0;
  double mean_passage_time = 0.0;
  double mean_reward_gain = 0.0;
  double stderr_ = 0.0;  // delta-method standard error
};

/// Monte Carlo (E[gamma(X_{T_S})] - gamma(s) - K) / E[T_S] over independent
/// passages from s to above S.
SsValue ss_strategy_value(const LevyModel& model, const RewardSpec& reward, double s, double S, double K,
                          std::size_t cycles, std::uint64_t seed, double dt, std::size_t max_steps = 10'000'000);

}  // namespace ddc
