#include "ddc/singular_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddc {

void CostSpec::validate() const {
  if (!running_cost) throw std::invalid_argument("running cost must be set");
  if (!(q_up > 0.0 && q_down > 0.0)) throw std::invalid_argument("control prices must be positive");
  if (!(box > 1.0)) throw std::invalid_argument("box constant B must exceed 1");
  if (floor < 0.0) throw std::invalid_argument("density floor must be nonnegative");
  const double c0 = running_cost(0.0);
  for (double x : linspace(-2.0 * box, 2.0 * box, 401)) {
    const double c = running_cost(x);
    if (!(c >= 0.0)) throw std::invalid_argument("running cost must be nonnegative");
    if (c < c0) throw std::invalid_argument("running cost must be minimal at 0");
  }
}

bool in_box(const CostSpec& spec, const ThresholdPair& pair) {
  constexpr double tol = 1e-12;
  const double b = spec.box, ib = spec.inner();
  return pair.lower >= -b - tol && pair.lower <= -ib + tol && pair.upper >= ib - tol && pair.upper <= b + tol;
}

namespace {

double plugin_ratio(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& rho_den, const ScalarFn& sigma,
                    const ThresholdPair& pair, int points) {
  if (!in_box(spec, pair)) throw std::invalid_argument("threshold pair outside K_B");
  const double num = simpson([&](double x) { return spec.running_cost(x) * rho(x); }, pair.lower, pair.upper, points);
  const double den = simpson(rho_den, pair.lower, pair.upper, points);
  if (!(den >= 1e-12)) throw std::domain_error("cost functional denominator vanishes (degenerate density)");
  const double sl = sigma(pair.lower), su = sigma(pair.upper);
  const double boundary = 0.5 * spec.q_up * sl * sl * rho(pair.lower) + 0.5 * spec.q_down * su * su * rho(pair.upper);
  return (num + boundary) / den;
}

}  // namespace

double cost_functional(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma, const ThresholdPair& pair,
                       int points) {
  return plugin_ratio(spec, rho, rho, sigma, pair, points);
}

double estimate_cost(const CostSpec& spec, const FunctionEstimate& rho_hat, const ScalarFn& sigma,
                     const ThresholdPair& pair, int points) {
  if (rho_hat.grid.empty() || rho_hat.grid.front() > pair.lower || rho_hat.grid.back() < pair.upper)
    throw std::out_of_range("density estimate grid does not cover the threshold interval");
  const ScalarFn f = [&](double x) { return rho_hat.at(x); };
  const ScalarFn floored = [&](double x) { return std::max(rho_hat.at(x), spec.floor); };
  return plugin_ratio(spec, f, floored, sigma, pair, points);
}

ThresholdGrid make_threshold_grid(double box, std::size_t points) {
  if (!(box > 1.0)) throw std::invalid_argument("box constant B must exceed 1");
  ThresholdGrid g;
  g.upper = linspace(1.0 / box, box, points);
  g.lower.resize(points);
  for (std::size_t i = 0; i < points; ++i) g.lower[i] = -g.upper[points - 1 - i];
  return g;
}

// ---------------------------------------------------------------------------

namespace {

// Cumulative Simpson integrals of f from 0 to each of the increasing,
// positive `points`.
template <class F>
std::vector<double> outward_table(F&& f, const std::vector<double>& points, int gap_panels) {
  std::vector<double> out(points.size());
  auto seg = [&](double a, double b, int panels) {
    return simpson(f, a, b, 2 * panels + 1);
  };
  double acc = seg(0.0, points.front(), gap_panels);
  out[0] = acc;
  for (std::size_t k = 1; k < points.size(); ++k) {
    acc += seg(points[k - 1], points[k], 2);
    out[k] = acc;
  }
  return out;
}

}  // namespace

CostSurface::CostSurface(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma, ThresholdGrid grid,
                         DensityMode mode, int gap_panels)
    : grid_(std::move(grid)) {
  if (grid_.lower.size() != grid_.upper.size()) throw std::invalid_argument("threshold grid must be square");
  const std::size_t n = grid_.upper.size();
  // Distances from 0 of the lower points, increasing.
  std::vector<double> lower_abs(n);
  for (std::size_t i = 0; i < n; ++i) lower_abs[i] = -grid_.lower[n - 1 - i];

  const double a = mode == DensityMode::plugin ? spec.floor : 0.0;
  auto cost_pos = [&](double x) { return spec.running_cost(x) * rho(x); };
  auto cost_neg = [&](double x) { return spec.running_cost(-x) * rho(-x); };
  auto mass_pos = [&](double x) { return std::max(rho(x), a); };
  auto mass_neg = [&](double x) { return std::max(rho(-x), a); };

  const auto cu = outward_table(cost_pos, grid_.upper, gap_panels);
  const auto mu = outward_table(mass_pos, grid_.upper, gap_panels);
  const auto cl = outward_table(cost_neg, lower_abs, gap_panels);
  const auto ml = outward_table(mass_neg, lower_abs, gap_panels);

  cost_upper_ = cu;
  mass_upper_ = mu;
  cost_lower_.resize(n);
  mass_lower_.resize(n);
  boundary_lower_.resize(n);
  boundary_upper_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cost_lower_[i] = cl[n - 1 - i];
    mass_lower_[i] = ml[n - 1 - i];
    const double xl = grid_.lower[i], xu = grid_.upper[i];
    const double sl = sigma(xl), su = sigma(xu);
    boundary_lower_[i] = 0.5 * spec.q_up * sl * sl * rho(xl);
    boundary_upper_[i] = 0.5 * spec.q_down * su * su * rho(xu);
  }
}

double CostSurface::operator()(std::size_t i, std::size_t j) const {
  const double num = (cost_lower_[i] + cost_upper_[j]) + (boundary_lower_[i] + boundary_upper_[j]);
  const double den = mass_lower_[i] + mass_upper_[j];
  if (!(den >= 1e-12)) throw std::domain_error("cost functional denominator vanishes (degenerate density)");
  return num / den;
}

OptimizedThresholds optimize_thresholds(const CostSurface& surface) {
  return grid_argmin(surface.grid(), [&](std::size_t i, std::size_t j) { return surface(i, j); });
}

OptimizedThresholds optimize_thresholds(const CostSpec& spec, const ScalarFn& rho, const ScalarFn& sigma,
                                        std::size_t points) {
  return optimize_thresholds(CostSurface(spec, rho, sigma, make_threshold_grid(spec.box, points), DensityMode::oracle));
}

OptimizedThresholds optimize_thresholds(const CostSpec& spec, const FunctionEstimate& rho_hat, const ScalarFn& sigma,
                                        std::size_t points) {
  if (rho_hat.grid.empty() || rho_hat.grid.front() > -spec.box || rho_hat.grid.back() < spec.box)
    throw std::out_of_range("density estimate grid does not cover [-B, B]");
  const ScalarFn f = [&](double x) { return rho_hat.at(x); };
  return optimize_thresholds(CostSurface(spec, f, sigma, make_threshold_grid(spec.box, points), DensityMode::plugin));
}

double value(const CostSpec& spec, const DiffusionModel& model, std::size_t points) {
  const InvariantDensity rho(model);
  return optimize_thresholds(spec, [&](double x) { return rho(x); }, model.volatility, points).value;
}

double default_floor(const InvariantDensity& rho, double box) {
  double lo = std::numeric_limits<double>::infinity();
  for (double x : linspace(-box, box, 401)) lo = std::min(lo, rho(x));
  return 0.5 * lo;
}

}  // namespace ddc
