#include "ddc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ddc/errors.hpp"
#include "ddc/random.hpp"

namespace ddc {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

void DiffusionModel::validate(std::size_t probe_points) const {
  if (!drift || !volatility) throw ModelError(name + ": drift and volatility must be set");
  if (!(growth >= 1.0)) throw ModelError(name + ": growth constant C must be >= 1");
  if (!(cutoff > 0.0)) throw ModelError(name + ": cutoff A must be positive");
  if (!(ergodicity_rate > 0.0)) throw ModelError(name + ": ergodicity rate gamma must be positive");
  if (!(vol_lo > 0.0 && vol_lo <= vol_hi)) throw ModelError(name + ": need 0 < nu_lo <= nu_hi");

  const double r = support_radius();
  constexpr double slack = 1e-12;
  for (double x : linspace(-r, r, probe_points)) {
    const double b = drift(x);
    const double s = volatility(x);
    if (!std::isfinite(b) || !std::isfinite(s)) throw ModelError(name + ": non-finite coefficient at x=" + fmt(x));
    if (s < vol_lo - slack || s > vol_hi + slack)
      throw ModelError(name + ": volatility bounds violated at x=" + fmt(x) + " (sigma=" + fmt(s) + ")");
    if (std::abs(b) > growth * (1.0 + std::abs(x)) + slack)
      throw ModelError(name + ": linear growth condition violated at x=" + fmt(x));
    if (std::abs(x) > cutoff && std::copysign(1.0, x) * b / (s * s) > -ergodicity_rate + slack)
      throw ModelError(name + ": mean-reversion (ergodicity) condition violated at x=" + fmt(x));
  }
}

DiffusionModel make_diffusion_model(const std::string& name, const DiffusionSpec& spec) {
  DiffusionModel m;
  m.name = name;
  const double k = spec.drift_scale;
  const double w = spec.drift_shape;
  if (spec.drift == "ou") {
    m.drift = [k](double x) { return -k * x; };
  } else if (spec.drift == "tanh-drift") {
    m.drift = [k, w](double x) { return -k * std::tanh(x / w); };
  } else if (spec.drift == "piecewise") {
    // Linear inside [-1, 1], slope w outside; continuous and Lipschitz.
    m.drift = [k, w](double x) {
      const double ax = std::abs(x);
      return ax <= 1.0 ? -k * x : -k * std::copysign(1.0 + w * (ax - 1.0), x);
    };
  } else {
    throw ModelError("unknown drift '" + spec.drift + "' (known: ou, tanh-drift, piecewise)");
  }

  const double level = spec.vol_level;
  const double bump = spec.vol_bump;
  if (spec.volatility == "constant") {
    m.volatility = [level](double) { return level; };
  } else if (spec.volatility == "bumped") {
    m.volatility = [level, bump](double x) { return level * (1.0 + bump * std::exp(-x * x)); };
  } else {
    throw ModelError("unknown volatility '" + spec.volatility + "' (known: constant, bumped)");
  }

  m.growth = spec.growth;
  m.cutoff = spec.cutoff;
  m.ergodicity_rate = spec.ergodicity_rate;
  m.vol_lo = spec.vol_lo;
  m.vol_hi = spec.vol_hi;
  return m;
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
}

// ---------------------------------------------------------------------------

InvariantDensity::InvariantDensity(const DiffusionModel& model, std::size_t cells) : model_(model) {
  model_.validate();
  if (cells % 2 == 1) ++cells;  // keep 0 on a node
  radius_ = model_.support_radius();
  cell_width_ = 2.0 * radius_ / static_cast<double>(cells);
  nodes_ = linspace(-radius_, radius_, cells + 1);
  nodes_[cells / 2] = 0.0;

  auto integrand = [this](double x) {
    const double s = model_.volatility(x);
    return 2.0 * model_.drift(x) / (s * s);
  };
  node_potential_.assign(cells + 1, 0.0);
  for (std::size_t j = cells / 2; j < cells; ++j)
    node_potential_[j + 1] = node_potential_[j] + adaptive_simpson(integrand, nodes_[j], nodes_[j + 1], 1e-14, 30);
  for (std::size_t j = cells / 2; j > 0; --j)
    node_potential_[j - 1] = node_potential_[j] - adaptive_simpson(integrand, nodes_[j - 1], nodes_[j], 1e-14, 30);

  const double peak = *std::max_element(node_potential_.begin(), node_potential_.end());
  if (peak > 600.0) throw ModelError(model_.name + ": potential too large to normalize (check drift sign)");

  auto unnormalized = [this](double x) {
    const double s = model_.volatility(x);
    return std::exp(potential(x)) / (s * s);
  };
  cumulative_.assign(cells + 1, 0.0);
  for (std::size_t j = 0; j < cells; ++j)
    cumulative_[j + 1] = cumulative_[j] + adaptive_simpson(unnormalized, nodes_[j], nodes_[j + 1], 1e-15, 20);
  normalizer_ = cumulative_.back();
  if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_))
    throw ModelError(model_.name + ": normalizer quadrature diverged (mean-reversion condition fails)");

  // Ergodic class => negligible mass in the outer tails of [-R, R].
  const double edge = std::max(unnormalized(-radius_), unnormalized(radius_)) * model_.vol_hi * model_.vol_hi;
  if (edge > 1e-10 * normalizer_)
    throw ModelError(model_.name + ": invariant density not negligible at the range edge (mean-reversion too weak)");
}

std::size_t InvariantDensity::cell_of(double x) const {
  const double pos = (x + radius_) / cell_width_;
  const auto last = nodes_.size() - 2;
  if (pos <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(pos), last);
}

double InvariantDensity::potential(double x) const {
  if (x <= -radius_ || x >= radius_) {
    // Outside the table: integrate from the nearest edge.
    const std::size_t j = x < 0.0 ? 0 : nodes_.size() - 1;
    auto integrand = [this](double y) {
      const double s = model_.volatility(y);
      return 2.0 * model_.drift(y) / (s * s);
    };
    return node_potential_[j] + adaptive_simpson(integrand, nodes_[j], x, 1e-12, 30);
  }
  const std::size_t j = cell_of(x);
  const double left = nodes_[j];
  if (x == left) return node_potential_[j];
  auto integrand = [this](double y) {
    const double s = model_.volatility(y);
    return 2.0 * model_.drift(y) / (s * s);
  };
  return node_potential_[j] + adaptive_simpson(integrand, left, x, 1e-14, 30);
}

double InvariantDensity::operator()(double x) const {
  const double s = model_.volatility(x);
  return std::exp(potential(x)) / (normalizer_ * s * s);
}

double InvariantDensity::cdf(double x) const {
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return 1.0;
  const std::size_t j = cell_of(x);
  auto f = [this](double y) { return (*this)(y); };
  const double partial = cumulative_[j] / normalizer_ + adaptive_simpson(f, nodes_[j], x, 1e-15, 20);
  return std::clamp(partial, 0.0, 1.0);
}

double InvariantDensity::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const double target = u * normalizer_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t j = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  j = std::clamp<std::size_t>(j, 1, nodes_.size() - 1) - 1;
  double lo = nodes_[j];
  double hi = nodes_[j + 1];
  for (int iter = 0; iter < 60 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double InvariantDensity::total_mass() const {
  // Simpson on the cell nodes plus cell midpoints.
  std::vector<double> values(2 * nodes_.size() - 1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    values[2 * i] = (*this)(nodes_[i]);
    if (i + 1 < nodes_.size()) values[2 * i + 1] = (*this)(0.5 * (nodes_[i] + nodes_[i + 1]));
  }
  return simpson_samples(values, 0.5 * cell_width_);
}

double invariant_density(const DiffusionModel& model, double x) { return InvariantDensity(model)(x); }

// ---------------------------------------------------------------------------

namespace {

void check_step(const DiffusionModel& model, double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (horizon < dt) throw std::invalid_argument("horizon must be at least one step");
  const double limit = 1e-2 * std::min(1.0, 1.0 / (model.growth * model.growth));
  if (dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("step size " + fmt(dt) + " exceeds stability limit " + fmt(limit));
}

}  // namespace

SamplePath simulate_path(const DiffusionModel& model, double x0, double horizon, double dt, std::uint64_t seed) {
  check_step(model, horizon, dt);
  const std::size_t n = step_count(horizon, dt);
  SamplePath path{dt, {}, x0, seed};
  path.values.resize(n + 1);
  path.values[0] = x0;
  RandomStream rng(seed);
  const double sq = std::sqrt(dt);
  double x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    x += model.drift(x) * dt + model.volatility(x) * sq * rng.normal();
    if (!std::isfinite(x)) throw SimulationError("non-finite diffusion state", k + 1);
    path.values[k + 1] = x;
  }
  return path;
}

ReflectedPath simulate_reflected(const DiffusionModel& model, double x0, double lower, double upper, double horizon,
                                 double dt, std::uint64_t seed) {
  check_step(model, horizon, dt);
  if (!(lower < upper)) throw std::invalid_argument("reflection barriers need lower < upper");
  if (x0 < lower || x0 > upper) throw std::invalid_argument("start point outside the reflection interval");
  const std::size_t n = step_count(horizon, dt);
  ReflectedPath out;
  out.lower = lower;
  out.upper = upper;
  out.path = SamplePath{dt, std::vector<double>(n + 1), x0, seed};
  out.local_time_up.assign(n + 1, 0.0);
  out.local_time_down.assign(n + 1, 0.0);
  out.path.values[0] = x0;
  RandomStream rng(seed);
  const double sq = std::sqrt(dt);
  double x = x0, up = 0.0, down = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x += model.drift(x) * dt + model.volatility(x) * sq * rng.normal();
    if (!std::isfinite(x)) throw SimulationError("non-finite diffusion state", k + 1);
    if (x < lower) {
      up += lower - x;
      x = lower;
    } else if (x > upper) {
      down += x - upper;
      x = upper;
    }
    out.path.values[k + 1] = x;
    out.local_time_up[k + 1] = up;
    out.local_time_down[k + 1] = down;
  }
  return out;
}

bool crosses(double previous, double current, double level, Crossing direction) {
  const bool up = previous < level && current >= level;
  const bool down = previous > level && current <= level;
  switch (direction) {
    case Crossing::up: return up;
    case Crossing::down: return down;
    case Crossing::either: return up || down;
  }
  return false;
}

std::optional<double> hitting_time(const SamplePath& path, double level, Crossing direction) {
  if (path.values.empty()) return std::nullopt;
  if (path.values[0] == level) return 0.0;
  for (std::size_t k = 1; k < path.values.size(); ++k)
    if (crosses(path.values[k - 1], path.values[k], level, direction)) return path.dt * static_cast<double>(k);
  return std::nullopt;
}

}  // namespace ddc
