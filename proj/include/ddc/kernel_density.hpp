#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddc/diffusion.hpp"
#include "ddc/quadrature.hpp"
#include "ddc/rate_fit.hpp"

namespace ddc {

/// Polynomial kernel Q(u) = p(u) (1 - 4u^2)^2 on |u| <= 1/2 whose moments
/// 1..order vanish. Q is C^1 on the real line.
struct KernelSpec {
  int order = 0;
  std::vector<double> p;        // coefficients of p in powers of u
  std::vector<double> q;        // coefficients of Q on its support
  double lipschitz = 0.0;       // max |Q'| on a probe grid
  std::vector<double> moments;  // moments[k] = int u^k Q, k = 0..order, by quadrature

  static constexpr double radius = 0.5;

  double operator()(double u) const {
    if (u < -radius || u > radius) return 0.0;
    double v = 0.0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) v = v * u + *it;
    return v;
  }
  int degree() const { return static_cast<int>(q.size()) - 1; }
};

/// Builds the order-m kernel (1 <= m <= 8) from its moment system.
KernelSpec make_order_kernel(int m);

/// h(T) = (log T)^2 / sqrt(T) without range checks.
double bandwidth_formula(double horizon);

/// Smallest horizon accepted by bandwidth(): the point past e^4 where h(T) drops to 1.05.
double min_horizon();

/// h(T) for T >= min_horizon(); throws otherwise.
double bandwidth(double horizon);

enum class EstimateKind { density, cost, generator_functional };

/// Function sampled on a strictly increasing grid, with run metadata.
struct FunctionEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double horizon = 0.0;
  double bandwidth = 0.0;
  std::uint64_t seed = 0;
  EstimateKind kind = EstimateKind::density;

  /// Linear interpolation; throws outside the grid.
  double at(double x) const;
};

/// Samples sorted into equal-width bins. Bins are grouped into blocks; each
/// bin keeps power sums of (X - block centre), cumulated within its block, so
/// a polynomial kernel sum over a window costs O(degree^2) per covered block
/// plus the two partially covered edge bins. Local centring keeps the power
/// sums well conditioned. Samples outside [lo, hi) are counted but not stored.
class BinnedSamples {
 public:
  BinnedSamples(double lo, double hi, double width, int max_degree, std::size_t block_bins = 256);

  void add(double x);
  void add(std::span<const double> xs) {
    for (double x : xs) add(x);
  }
  std::size_t count() const { return count_; }
  double lo() const { return lo_; }
  double hi() const { return lo_ + width_ * static_cast<double>(bins_.size()); }

  /// sum_i Q((x - X_i) / h) over all stored samples.
  double kernel_sum(const KernelSpec& kernel, double h, double x) const;

 private:
  void refresh() const;

  double anchor(std::size_t block) const;

  double lo_;
  double width_;
  int max_degree_;
  std::size_t block_bins_;
  std::size_t count_ = 0;
  std::vector<std::vector<double>> bins_;
  std::vector<long double> power_;           // per bin, (max_degree+1) centred power sums
  mutable std::vector<long double> prefix_;  // cumulated from the start of each block
  mutable bool dirty_ = true;
};

/// rho_hat(x) = (1 / (n h)) sum_k Q((x - X_k) / h) for samples X_0..X_{n-1}.
class KernelDensityEstimator {
 public:
  KernelDensityEstimator(std::span<const double> samples, const KernelSpec& kernel, double h, double lo, double hi);

  double operator()(double x) const;
  std::vector<double> evaluate(std::span<const double> grid) const;
  double bandwidth() const { return h_; }

 private:
  KernelSpec kernel_;
  double h_;
  BinnedSamples bins_;
};

/// Left Riemann samples of a path: values[0..n-1].
std::span<const double> riemann_samples(const SamplePath& path);

/// Density estimate on `grid` with h = bandwidth(path horizon).
FunctionEstimate estimate_density(const SamplePath& path, const KernelSpec& kernel, std::span<const double> grid);

/// Same with an explicit bandwidth (no horizon check).
FunctionEstimate estimate_density(const SamplePath& path, const KernelSpec& kernel, std::span<const double> grid,
                                  double h);

template <class F>
double sup_norm_risk(const FunctionEstimate& estimate, F&& truth) {
  double worst = 0.0;
  for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
    const double e = std::abs(estimate.values[i] - truth(estimate.grid[i]));
    if (e > worst) worst = e;
  }
  return worst;
}

struct VarianceReport {
  double x = 0.0;
  double horizon = 0.0;
  std::size_t replicates = 0;
  std::vector<double> bandwidths;
  std::vector<double> variances;  // Var of T^{-1/2} int_0^T Q((x - X_u)/h) du
  std::vector<double> ratios;     // variance / (rho(x) h^2)
  RateFit fit;                    // log variance against log h
};

/// Stationary-start Monte Carlo of the kernel-functional variance at x.
/// One path per replicate serves every bandwidth.
VarianceReport variance_check(const DiffusionModel& model, const KernelSpec& kernel, double x,
                              std::span<const double> bandwidths, double horizon, double dt, std::size_t replicates,
                              std::uint64_t seed);

/// Stationary start drawn by inverse CDF from a separate stream of `seed`.
double stationary_start(const InvariantDensity& density, std::uint64_t seed);

}  // namespace ddc
