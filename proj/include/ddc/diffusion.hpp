#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ddc/quadrature.hpp"

namespace ddc {

/// Scalar diffusion dX = b(X) dt + sigma(X) dW together with the constants
/// of the ergodic class it is declared to belong to.
struct DiffusionModel {
  std::string name;
  ScalarFn drift;
  ScalarFn volatility;
  double growth = 1.0;          // C >= 1 in |b(x)| <= C (1 + |x|)
  double cutoff = 1.0;          // A: the mean-reversion condition holds for |x| > A
  double ergodicity_rate = 1.0; // gamma: sgn(x) b(x) / sigma^2(x) <= -gamma for |x| > A
  double vol_lo = 1.0;
  double vol_hi = 1.0;

  /// Half-width R = A + 20 / gamma of the range used for quadrature and probing.
  double support_radius() const { return cutoff + 20.0 / ergodicity_rate; }

  /// Probes the class conditions on a dense grid over [-R, R]; throws
  /// ModelError naming the first violated condition.
  void validate(std::size_t probe_points = 4001) const;
};

/// Parameters selecting a drift and a volatility from the built-in registry.
struct DiffusionSpec {
  std::string drift = "ou";       // ou | tanh-drift | piecewise
  double drift_scale = 1.0;       // kappa
  double drift_shape = 1.0;       // tanh width or outer slope of the piecewise drift
  std::string volatility = "constant";  // constant | bumped
  double vol_level = 1.0;
  double vol_bump = 0.0;
  double growth = 1.0;
  double cutoff = 1.0;
  double ergodicity_rate = 1.0;
  double vol_lo = 1.0;
  double vol_hi = 1.0;
};

DiffusionModel make_diffusion_model(const std::string& name, const DiffusionSpec& spec);

/// Equidistant Euler path; values[k] is the state at time k * dt.
struct SamplePath {
  double dt = 0.0;
  std::vector<double> values;
  double x0 = 0.0;
  std::uint64_t seed = 0;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const { return dt * static_cast<double>(steps()); }
};

/// Path reflected into [lower, upper]; local_time_up/down are the cumulative
/// pushes U and D (same length as path.values, starting at 0).
struct ReflectedPath {
  SamplePath path;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> local_time_up;
  std::vector<double> local_time_down;
};

/// Number of Euler steps covering a horizon T (floor(T / dt), robust to rounding).
std::size_t step_count(double horizon, double dt);

/// Closed-form invariant density of an ergodic diffusion, normalized once by
/// quadrature over [-R, R]. Also exposes the stationary CDF and quantile.
class InvariantDensity {
 public:
  explicit InvariantDensity(const DiffusionModel& model, std::size_t cells = 4000);

  double operator()(double x) const;
  double potential(double x) const;  // int_0^x 2 b / sigma^2
  double normalizer() const { return normalizer_; }
  double radius() const { return radius_; }
  double cdf(double x) const;
  double quantile(double u) const;
  /// Quadrature of the normalized density over its own cells.
  double total_mass() const;

 private:
  std::size_t cell_of(double x) const;

  DiffusionModel model_;
  double radius_;
  double cell_width_;
  std::vector<double> nodes_;
  std::vector<double> node_potential_;
  std::vector<double> cumulative_;  // unnormalized mass up to each node
  double normalizer_;
};

/// rho_b(x) for a single point. Builds the normalizer on every call; prefer
/// InvariantDensity for repeated evaluation.
double invariant_density(const DiffusionModel& model, double x);

SamplePath simulate_path(const DiffusionModel& model, double x0, double horizon, double dt,
                         std::uint64_t seed);

ReflectedPath simulate_reflected(const DiffusionModel& model, double x0, double lower, double upper,
                                 double horizon, double dt, std::uint64_t seed);

enum class Crossing { up, down, either };

/// First grid time at which the path crosses `level` in the given direction
/// (a sign change between consecutive grid points counts at the later point).
std::optional<double> hitting_time(const SamplePath& path, double level, Crossing direction);

/// Index-level variant used by the controller.
bool crosses(double previous, double current, double level, Crossing direction);

}  // namespace ddc
