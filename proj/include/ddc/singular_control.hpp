#pragma once

#include <cstddef>
#include <vector>

#include "ddc/diffusion.hpp"
#include "ddc/kernel_density.hpp"
#include "ddc/quadrature.hpp"

namespace ddc {

/// Running cost, proportional control prices and the box K_B with density floor a.
struct CostSpec {
  ScalarFn running_cost;
  double q_up = 1.0;
  double q_down = 1.0;
  double box = 1.5;    // B > 1
  double floor = 0.0;  // a > 0, used by the plug-in denominator only

  void validate() const;
  double inner() const { return 1.0 / box; }
};

struct ThresholdPair {
  double lower = 0.0;  // xi
  double upper = 0.0;  // theta
};

bool in_box(const CostSpec& spec, const ThresholdPair& pair);

/// C(xi, theta) with Simpson on 401 points.
double cost_functional(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma, const ThresholdPair& pair,
                       int points = 401);

/// Plug-in cost: rho_hat in the numerator, max(rho_hat, a) in the denominator.
double estimate_cost(const CostSpec& spec, const FunctionEstimate& rho_hat, const ScalarFn& sigma,
                     const ThresholdPair& pair, int points = 401);

/// Symmetric candidate grid on K_B: lower[i] = -upper[n-1-i] exactly.
struct ThresholdGrid {
  std::vector<double> lower;
  std::vector<double> upper;
};

ThresholdGrid make_threshold_grid(double box, std::size_t points = 101);

enum class DensityMode { oracle, plugin };

/// C (or C_hat) on every pair of a threshold grid. Integrals come from
/// cumulative Simpson tables built outward from 0, so each pair costs O(1)
/// and mirrored pairs of a symmetric problem produce identical values.
class CostSurface {
 public:
  CostSurface(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma, ThresholdGrid grid,
              DensityMode mode, int gap_panels = 128);

  double operator()(std::size_t i, std::size_t j) const;
  std::size_t rows() const { return grid_.lower.size(); }
  std::size_t cols() const { return grid_.upper.size(); }
  const ThresholdGrid& grid() const { return grid_; }

 private:
  ThresholdGrid grid_;
  // Signed cumulative integrals from 0 at the grid points.
  std::vector<double> cost_lower_, cost_upper_, mass_lower_, mass_upper_;
  std::vector<double> boundary_lower_, boundary_upper_;
};

struct OptimizedThresholds {
  ThresholdPair pair;
  double value = 0.0;
  std::size_t i = 0, j = 0;
};

/// Grid argmin of value(i, j); ties go to the lexicographically smallest (xi, theta).
template <class F>
OptimizedThresholds grid_argmin(const ThresholdGrid& grid, F&& value) {
  OptimizedThresholds best;
  bool first = true;
  for (std::size_t i = 0; i < grid.lower.size(); ++i)
    for (std::size_t j = 0; j < grid.upper.size(); ++j) {
      const double v = value(i, j);
      if (first || v < best.value) {
        best = {{grid.lower[i], grid.upper[j]}, v, i, j};
        first = false;
      }
    }
  return best;
}

OptimizedThresholds optimize_thresholds(const CostSurface& surface);
OptimizedThresholds optimize_thresholds(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma,
                                        std::size_t points = 101);
OptimizedThresholds optimize_thresholds(const CostSpec& spec, const FunctionEstimate& rho_hat, const ScalarFn& sigma,
                                        std::size_t points = 101);

/// Optimal value V over the K_B grid with the oracle density.
double value(const CostSpec& spec, const DiffusionModel& model, std::size_t points = 101);

/// Half the minimum of the oracle density over [-B, B].
double default_floor(const InvariantDensity& rho, double box);

}  // namespace ddc
