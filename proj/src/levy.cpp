#include "ddc/levy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddc/errors.hpp"
#include "ddc/quadrature.hpp"

namespace ddc {

double JumpLaw::mean() const {
  switch (kind) {
    case JumpKind::none: return 0.0;
    case JumpKind::exponential: return sign() / parameter;
    case JumpKind::uniform: return sign() * parameter / 2.0;
    case JumpKind::point: return sign() * parameter;
  }
  return 0.0;
}

double JumpLaw::second_moment() const {
  switch (kind) {
    case JumpKind::none: return 0.0;
    case JumpKind::exponential: return 2.0 / (parameter * parameter);
    case JumpKind::uniform: return parameter * parameter / 3.0;
    case JumpKind::point: return parameter * parameter;
  }
  return 0.0;
}

double JumpLaw::magnitude_tail(double y) const {
  if (y < 0.0) return 1.0;
  switch (kind) {
    case JumpKind::none: return 0.0;
    case JumpKind::exponential: return std::exp(-parameter * y);
    case JumpKind::uniform: return y >= parameter ? 0.0 : 1.0 - y / parameter;
    case JumpKind::point: return y >= parameter ? 0.0 : 1.0;
  }
  return 0.0;
}

double JumpLaw::magnitude_density(double y) const {
  if (y < 0.0) return 0.0;
  switch (kind) {
    case JumpKind::exponential: return parameter * std::exp(-parameter * y);
    case JumpKind::uniform: return y <= parameter ? 1.0 / parameter : 0.0;
    default: return 0.0;
  }
}

double JumpLaw::truncation() const {
  switch (kind) {
    case JumpKind::none: return 0.0;
    case JumpKind::exponential: return std::log(1e12) / parameter;
    default: return parameter;
  }
}

double JumpLaw::sample(RandomStream& rng) const {
  switch (kind) {
    case JumpKind::none: return 0.0;
    case JumpKind::exponential: return sign() * rng.exponential(parameter);
    case JumpKind::uniform: return sign() * parameter * (1.0 - rng.uniform());  // (0, c]
    case JumpKind::point: return sign() * parameter;
  }
  return 0.0;
}

void LevyModel::validate(bool require_positive_mean) const {
  if (sigma < 0.0 || rate < 0.0) throw ModelError(name + ": sigma and jump rate must be nonnegative");
  if (rate > 0.0 && jumps.kind == JumpKind::none) throw ModelError(name + ": positive jump rate without a jump law");
  if (jumps.kind != JumpKind::none && !(jumps.parameter > 0.0)) throw ModelError(name + ": jump law parameter must be positive");
  if (subordinator && (sigma != 0.0 || drift < 0.0 || (rate > 0.0 && jumps.negative)))
    throw ModelError(name + ": declared subordinator needs sigma = 0, a >= 0 and nonnegative jumps");
  if (spectrally_negative && rate > 0.0 && !jumps.negative)
    throw ModelError(name + ": declared spectrally negative but has positive jumps");
  if (bounded_jumps && rate > 0.0 && !jumps.bounded()) throw ModelError(name + ": declared bounded jumps but law is unbounded");
  if (require_positive_mean) {
    if (!(mean() > 0.0)) throw ModelError(name + ": mean eta must be positive (upward drift assumption)");
    if (!(sigma > 0.0 || drift > 0.0)) throw ModelError(name + ": not upward regular (need sigma > 0 or a > 0)");
  }
}

LevyModel make_levy_model(const std::string& name, const LevySpec& spec) {
  LevyModel m;
  m.name = name;
  m.drift = spec.drift;
  m.sigma = spec.sigma;
  m.rate = spec.rate;
  if (spec.jump_law == "exponential") m.jumps.kind = JumpKind::exponential;
  else if (spec.jump_law == "uniform") m.jumps.kind = JumpKind::uniform;
  else if (spec.jump_law == "point") m.jumps.kind = JumpKind::point;
  else if (spec.jump_law == "none") m.jumps.kind = JumpKind::none;
  else throw ModelError("unknown jump law '" + spec.jump_law + "' (known: exponential, uniform, point, none)");
  m.jumps.parameter = spec.jump_parameter;
  m.jumps.negative = spec.negative_jumps;
  if (m.jumps.kind == JumpKind::none) m.rate = 0.0;
  const bool has_jumps = m.rate > 0.0;
  m.subordinator = m.sigma == 0.0 && m.drift >= 0.0 && (!has_jumps || !m.jumps.negative);
  m.spectrally_negative = !has_jumps || m.jumps.negative;
  m.bounded_jumps = !has_jumps || m.jumps.bounded();
  return m;
}

LevyModel make_levy_model(const std::string& name) {
  LevySpec s;
  if (name == "exp-subordinator") {
    s = {1.0, 0.0, 1.0, "exponential", 1.0, false};
  } else if (name == "uniform-subordinator") {
    s = {0.5, 0.0, 1.0, "uniform", 1.0, false};
  } else if (name == "spec-neg") {
    s = {2.0, 1.0, 1.0, "exponential", 1.0, true};
  } else if (name == "centered-uniform") {
    s = {-0.5, 0.5, 1.0, "uniform", 1.0, false};
  } else if (name == "pure-drift") {
    s = {1.0, 0.0, 0.0, "none", 1.0, false};
  } else {
    throw ModelError("unknown Levy model '" + name +
                     "' (known: exp-subordinator, uniform-subordinator, spec-neg, centered-uniform, pure-drift)");
  }
  return make_levy_model(name, s);
}

// ---------------------------------------------------------------------------

LevyPath simulate_levy_path(const LevyModel& model, double horizon, double dt, std::uint64_t seed) {
  if (!(dt > 0.0) || horizon < dt) throw std::invalid_argument("need 0 < dt <= horizon");
  if (model.rate > 0.0 && dt > 1e-3 * std::min(1.0, 1.0 / model.rate) * (1.0 + 1e-12))
    throw std::invalid_argument("step size too large for the jump rate (need dt <= 1e-3 min(1, 1/r))");
  const auto n = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  LevyPath path;
  path.dt = dt;
  path.seed = seed;
  path.horizon = static_cast<double>(n) * dt;
  path.values.resize(n + 1);
  path.values[0] = 0.0;

  RandomStream gauss(seed, 0);
  RandomStream jumps(seed, 1);
  const double sq = std::sqrt(dt);
  double brownian = 0.0, jump_total = 0.0;
  double next_arrival = model.rate > 0.0 ? jumps.exponential(model.rate) : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    if (model.sigma > 0.0) brownian += model.sigma * sq * gauss.normal();
    const double t = static_cast<double>(k + 1) * dt;
    double x = model.drift * t + brownian + jump_total;
    while (next_arrival <= t) {
      const double size = model.jumps.sample(jumps);
      path.jump_steps.push_back(k);
      path.jump_times.push_back(next_arrival);
      path.jump_sizes.push_back(size);
      path.pre_jump.push_back(x);
      x += size;
      jump_total += size;
      next_arrival += jumps.exponential(model.rate);
    }
    if (!std::isfinite(x)) throw SimulationError("non-finite Levy state", k + 1);
    path.values[k + 1] = x;
  }
  return path;
}

double sample_levy_marginal(const LevyModel& model, double horizon, RandomStream& rng) {
  double x = model.drift * horizon;
  if (model.sigma > 0.0) x += model.sigma * std::sqrt(horizon) * rng.normal();
  const auto count = rng.poisson(model.rate * horizon);
  for (std::uint64_t i = 0; i < count; ++i) x += model.jumps.sample(rng);
  return x;
}

// ---------------------------------------------------------------------------

double OvershootSeries::at(double level) const {
  if (level < 0.0 || level > max_level) throw std::out_of_range("level outside the overshoot series");
  auto it = std::upper_bound(segments.begin(), segments.end(), level,
                             [](double v, const OvershootSegment& s) { return v < s.hi; });
  if (it == segments.end()) return 0.0;  // level == max_level reached by creeping
  if (level < it->lo) return 0.0;
  return it->sloped ? it->start - (level - it->lo) : it->start;
}

OvershootSeries extract_overshoots(const LevyPath& path, double max_level) {
  if (path.values.empty()) throw std::invalid_argument("empty Levy path");
  const double top = *std::max_element(path.values.begin(), path.values.end());
  if (max_level > top) throw std::invalid_argument("requested level exceeds the path maximum");

  OvershootSeries out;
  out.terminal = path.values.back();
  out.max_level = max_level;
  double running = std::max(0.0, path.values.front());
  auto creep = [&](double to) {
    to = std::min(to, max_level);
    if (to <= running) return;
    if (!out.segments.empty() && !out.segments.back().sloped && out.segments.back().start == 0.0 &&
        out.segments.back().hi == running)
      out.segments.back().hi = to;
    else
      out.segments.push_back({running, to, 0.0, false});
    running = to;
  };
  auto jump = [&](double landing) {
    if (running >= max_level) return;
    const double hi = std::min(landing, max_level);
    out.segments.push_back({running, hi, landing - running, true});
    running = landing;
  };
  if (path.values.front() > 0.0) out.segments.push_back({0.0, std::min(running, max_level), 0.0, false});

  std::size_t j = 0;
  for (std::size_t k = 0; k + 1 < path.values.size() && running < max_level; ++k) {
    if (j < path.jump_steps.size() && path.jump_steps[j] == k) {
      creep(path.pre_jump[j]);
      for (; j < path.jump_steps.size() && path.jump_steps[j] == k; ++j) {
        const double landing = path.pre_jump[j] + path.jump_sizes[j];
        if (landing > running) {
          if (path.pre_jump[j] > running) creep(path.pre_jump[j]);
          jump(landing);
        }
      }
    } else {
      creep(path.values[k + 1]);
    }
  }
  return out;
}

OvershootLaw stationary_overshoot_law(const LevyModel& model) {
  OvershootLaw law;
  if (model.subordinator) {
    model.validate();
    const double eta = model.mean();
    law.atom = model.drift / eta;
    const JumpLaw j = model.jumps;
    const double scale = model.rate / eta;
    law.tail_density = [j, scale](double y) { return y < 0.0 ? 0.0 : scale * j.magnitude_tail(y); };
    law.cdf = [j, scale, atom = law.atom](double y) {
      if (y < 0.0) return 0.0;
      double integral = 0.0;
      switch (j.kind) {
        case JumpKind::exponential: integral = -std::expm1(-j.parameter * y) / j.parameter; break;
        case JumpKind::uniform: {
          const double c = j.parameter, z = std::min(y, c);
          integral = z - z * z / (2.0 * c);
          break;
        }
        case JumpKind::point: integral = std::min(y, j.parameter); break;
        case JumpKind::none: break;
      }
      return std::min(1.0, atom + scale * integral);
    };
    return law;
  }
  if (model.spectrally_negative) {
    model.validate();
    law.atom = 1.0;
    law.tail_density = [](double) { return 0.0; };
    law.cdf = [](double y) { return y < 0.0 ? 0.0 : 1.0; };
    return law;
  }
  throw ModelError(model.name + ": ladder height not available in closed form for this model");
}

// ---------------------------------------------------------------------------

EmpiricalOvershootCdf::EmpiricalOvershootCdf(const OvershootSeries& series, double level) : level_(level) {
  if (!(level > 0.0)) throw std::invalid_argument("overshoot distribution needs a positive level");
  if (level > series.max_level * (1.0 + 1e-12)) throw std::invalid_argument("level exceeds the overshoot series");
  double covered = 0.0;
  for (const auto& s : series.segments) {
    if (s.lo >= level) break;
    const double hi = std::min(s.hi, level);
    const double len = hi - s.lo;
    covered += len;
    if (s.sloped)
      sloped_.push_back({s.start - len, s.start});
    else if (s.start == 0.0)
      flat_zero_ += len;
    else
      flat_.emplace_back(s.start, len);
  }
  flat_zero_ += std::max(0.0, level - covered);  // levels reached by creeping at the top
}

double EmpiricalOvershootCdf::operator()(double y) const {
  if (y < 0.0) return 0.0;
  double acc = flat_zero_;
  for (const auto& [v, len] : flat_)
    if (v <= y) acc += len;
  for (const auto& p : sloped_) acc += std::clamp(y - p.lo, 0.0, p.hi - p.lo);
  return std::min(1.0, acc / level_);
}

std::vector<double> EmpiricalOvershootCdf::breakpoints() const {
  std::vector<double> out{0.0};
  for (const auto& [v, len] : flat_) out.push_back(v);
  for (const auto& p : sloped_) {
    out.push_back(p.lo);
    out.push_back(p.hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double EmpiricalOvershootCdf::max_value() const {
  double m = 0.0;
  for (const auto& [v, len] : flat_) m = std::max(m, v);
  for (const auto& p : sloped_) m = std::max(m, p.hi);
  return m;
}

EmpiricalOvershootCdf empirical_overshoot_distribution(const OvershootSeries& series, double level) {
  return EmpiricalOvershootCdf(series, level);
}

double ks_distance(const EmpiricalOvershootCdf& empirical, const OvershootLaw& law, std::size_t grid_points) {
  auto pts = empirical.breakpoints();
  const double top = std::max(empirical.max_value(), 1.0) * 1.5;
  for (double y : linspace(0.0, top, grid_points)) pts.push_back(y);
  double worst = 0.0;
  for (double y : pts) worst = std::max(worst, std::abs(empirical(y) - law.cdf(y)));
  return worst;
}

}  // namespace ddc
