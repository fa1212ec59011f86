#include "ddc/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddc/errors.hpp"
#include "ddc/random.hpp"

namespace ddc {

void RewardSpec::validate() const {
  if (!gamma || !gamma_prime) throw std::invalid_argument(name + ": reward and derivative must be set");
  if (!(domain_lo < domain_hi)) throw std::invalid_argument(name + ": empty reward domain");
  const double step = 1e-4;
  for (double x : linspace(domain_lo - 5.0, domain_hi + 5.0, 2001)) {
    const double d = gamma_prime(x);
    if (d < -1e-14) throw std::invalid_argument(name + ": reward must be nondecreasing");
    if (std::abs(d) > derivative_bound * (1.0 + 1e-12)) throw std::invalid_argument(name + ": derivative bound violated");
    const double fd = (gamma(x + step) - gamma(x - step)) / (2.0 * step);
    if (std::abs(fd - d) > 1e-6) throw std::invalid_argument(name + ": derivative inconsistent with the reward");
  }
}

RewardSpec make_reward(const std::string& name, double centre, double scale, double domain_lo, double domain_hi) {
  if (!(scale > 0.0)) throw std::invalid_argument("reward scale must be positive");
  RewardSpec r;
  r.name = name;
  r.domain_lo = domain_lo;
  r.domain_hi = domain_hi;
  if (name == "tanh") {
    r.gamma = [centre, scale](double x) { return std::tanh((x - centre) / scale); };
    r.gamma_prime = [centre, scale](double x) {
      const double c = std::cosh((x - centre) / scale);
      return 1.0 / (scale * c * c);
    };
    r.derivative_bound = 1.0 / scale;
  } else if (name == "logistic") {
    r.gamma = [centre, scale](double x) { return 1.0 / (1.0 + std::exp(-(x - centre) / scale)); };
    r.gamma_prime = [centre, scale](double x) {
      const double e = std::exp(-std::abs(x - centre) / scale);
      return e / (scale * (1.0 + e) * (1.0 + e));
    };
    r.derivative_bound = 0.25 / scale;
  } else {
    throw std::invalid_argument("unknown reward '" + name + "' (known: tanh, logistic)");
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void require_oracle(const LevyModel& model) {
  if (!model.has_ladder_oracle())
    throw ModelError(model.name + ": ladder height not available in closed form for this model");
  model.validate();
}

// Adaptive Simpson over [0, end] split into unit pieces to keep the recursion shallow.
template <class F>
double integrate_half_line(F&& f, double end) {
  if (end <= 0.0) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(end)));
  const double w = end / pieces;
  double acc = 0.0;
  for (int i = 0; i < pieces; ++i) acc += adaptive_simpson(f, i * w, (i + 1) * w, 1e-14, 40);
  return acc;
}

}  // namespace

GeneratorForms generator_functional_forms(const LevyModel& model, const RewardSpec& reward, double x) {
  require_oracle(model);
  const double eta = model.mean();
  GeneratorForms out;
  if (model.subordinator && model.rate > 0.0) {
    const JumpLaw& j = model.jumps;
    const double end = j.truncation();
    double jump_part = 0.0;
    if (j.kind == JumpKind::point) {
      jump_part = reward.gamma(x + j.parameter) - reward.gamma(x);
    } else {
      const double gx = reward.gamma(x);
      jump_part = integrate_half_line([&](double y) { return (reward.gamma(x + y) - gx) * j.magnitude_density(y); }, end);
    }
    out.generator = model.drift * reward.gamma_prime(x) + model.rate * jump_part;
    const double tail_part =
        integrate_half_line([&](double y) { return reward.gamma_prime(x + y) * j.magnitude_tail(y); }, end);
    out.overshoot = model.drift * reward.gamma_prime(x) + model.rate * tail_part;
  } else {
    // Creeping ladder height: d_H = eta, no jumps, mu = delta_0.
    out.generator = eta * reward.gamma_prime(x);
    out.overshoot = eta * reward.gamma_prime(x);
  }
  return out;
}

double generator_functional(const LevyModel& model, const RewardSpec& reward, double x) {
  const auto f = generator_functional_forms(model, reward, x);
  if (std::abs(f.generator - f.overshoot) > 1e-8 * std::max(1.0, std::abs(f.overshoot)))
    throw std::logic_error("generator functional forms disagree at x = " + std::to_string(x));
  return f.overshoot;
}

FunctionEstimate overshoot_estimator_level(const OvershootSeries& series, const RewardSpec& reward, double eta,
                                           double level, std::span<const double> grid) {
  if (!(level > 0.0)) throw std::invalid_argument("level must be positive");
  if (level > series.max_level * (1.0 + 1e-12)) throw std::invalid_argument("level exceeds the overshoot series");
  FunctionEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(grid.size(), 0.0);
  out.horizon = level;
  out.kind = EstimateKind::generator_functional;

  // Level measure with zero overshoot, plus the remaining pieces.
  double zero_len = 0.0, covered = 0.0;
  std::vector<OvershootSegment> pieces;
  for (const auto& s : series.segments) {
    if (s.lo >= level) break;
    const double hi = std::min(s.hi, level);
    covered += hi - s.lo;
    if (!s.sloped && s.start == 0.0)
      zero_len += hi - s.lo;
    else
      pieces.push_back({s.lo, hi, s.start, s.sloped});
  }
  zero_len += std::max(0.0, level - covered);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    double acc = zero_len * reward.gamma_prime(x);
    for (const auto& p : pieces) {
      const double len = p.hi - p.lo;
      acc += p.sloped ? reward.gamma(x + p.start) - reward.gamma(x + p.start - len)
                      : len * reward.gamma_prime(x + p.start);
    }
    out.values[i] = eta * acc / level;
  }
  return out;
}

FunctionEstimate overshoot_estimator_time(const LevyPath& path, const RewardSpec& reward, double eta,
                                          std::span<const double> grid) {
  const double terminal = path.values.empty() ? 0.0 : path.values.back();
  if (!(terminal > 0.0)) {
    FunctionEstimate zero;
    zero.grid.assign(grid.begin(), grid.end());
    zero.values.assign(grid.size(), 0.0);
    zero.horizon = path.horizon;
    zero.seed = path.seed;
    zero.kind = EstimateKind::generator_functional;
    return zero;
  }
  auto est = overshoot_estimator_level(extract_overshoots(path, terminal), reward, eta, terminal, grid);
  est.horizon = path.horizon;
  est.seed = path.seed;
  return est;
}

double plugin_mean(const LevyPath& path) { return path.values.back() / path.horizon; }

// ---------------------------------------------------------------------------

TailBoundReport tail_bound_check(const LevyModel& model, double p, std::span<const double> horizons,
                                 std::size_t replicates, std::uint64_t seed) {
  model.validate(false);
  if (model.sigma == 0.0 && model.rate == 0.0)
    throw std::invalid_argument("tail bound needs a non-trivial process (sigma > 0 or jumps)");
  if (model.rate > 0.0 && !model.jumps.bounded()) throw std::invalid_argument("tail bound needs bounded jumps");
  if (std::abs(model.mean()) > 1e-12) throw std::invalid_argument("tail bound needs a centred process (eta = 0)");
  if (replicates == 0) throw std::invalid_argument("need at least one replicate");

  TailBoundReport rep;
  rep.p = p;
  rep.beta = model.sigma * model.sigma + model.rate * model.jumps.second_moment();
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const double T = horizons[h];
    TailBoundRow row;
    row.horizon = T;
    row.threshold = std::sqrt(rep.beta * T * p * std::log(T));
    std::size_t hits = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
      RandomStream rng(replicate_seed(seed, r), static_cast<std::uint32_t>(10 + h));
      hits += std::abs(sample_levy_marginal(model, T, rng)) > row.threshold;
    }
    row.frequency = static_cast<double>(hits) / static_cast<double>(replicates);
    row.bound = 2.0 * std::pow(T, -p / 2.0);
    const double b = std::min(row.bound, 1.0);
    row.stderr_ = std::sqrt(b * (1.0 - b) / static_cast<double>(replicates));
    row.within = row.frequency <= row.bound + 3.0 * row.stderr_;
    rep.rows.push_back(row);
  }
  return rep;
}

BoundaryChoice optimize_boundary(const FunctionEstimate& estimate) {
  if (estimate.grid.empty()) throw std::invalid_argument("empty estimate");
  BoundaryChoice best{estimate.grid[0], estimate.values[0], 0};
  for (std::size_t i = 1; i < estimate.values.size(); ++i)
    if (estimate.values[i] > best.value) best = {estimate.grid[i], estimate.values[i], i};
  return best;
}

LevyOracle levy_oracle(const LevyModel& model, const RewardSpec& reward, std::span<const double> grid) {
  LevyOracle o;
  o.f.grid.assign(grid.begin(), grid.end());
  o.f.kind = EstimateKind::generator_functional;
  for (double x : grid) o.f.values.push_back(generator_functional(model, reward, x));
  o.best = optimize_boundary(o.f);
  return o;
}

double levy_regret(const LevyOracle& oracle, double theta_hat) {
  const auto& g = oracle.f.grid;
  auto it = std::lower_bound(g.begin(), g.end(), theta_hat);
  if (it == g.end() || *it != theta_hat) throw std::invalid_argument("boundary is not a point of the oracle grid");
  return oracle.best.value - oracle.f.values[static_cast<std::size_t>(std::distance(g.begin(), it))];
}

bool unimodal(const FunctionEstimate& f) {
  const auto best = optimize_boundary(f).index;
  for (std::size_t i = 1; i <= best; ++i)
    if (!(f.values[i] > f.values[i - 1])) return false;
  for (std::size_t i = best + 1; i < f.values.size(); ++i)
    if (!(f.values[i] < f.values[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

SsValue ss_strategy_value(const LevyModel& model, const RewardSpec& reward, double s, double S, double K,
                          std::size_t cycles, std::uint64_t seed, double dt, std::size_t max_steps) {
  require_oracle(model);
  if (!(s < S)) throw std::invalid_argument("(s, S) strategy needs s < S");
  if (!(K >= 0.0)) throw std::invalid_argument("fixed cost must be nonnegative");
  if (cycles < 2) throw std::invalid_argument("need at least two cycles");

  const double sq = std::sqrt(dt);
  double sum_g = 0.0, sum_t = 0.0, sum_gg = 0.0, sum_tt = 0.0, sum_gt = 0.0;
  for (std::size_t c = 0; c < cycles; ++c) {
    // Cycle index in the stream id: nearby base seeds then share no cycles.
    const auto id = static_cast<std::uint32_t>(2 * c);
    RandomStream gauss(seed, id + 100);
    RandomStream jumps(seed, id + 101);
    double x = s, t = 0.0, passage = -1.0, landing = 0.0;
    double next_arrival = model.rate > 0.0 ? jumps.exponential(model.rate) : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; passage < 0.0; ++k) {
      if (k >= max_steps) throw SimulationError("first passage not reached within the step cap", k);
      double inc = model.drift * dt;
      if (model.sigma > 0.0) inc += model.sigma * sq * gauss.normal();
      if (x + inc >= S) {
        // Continuous crossing: creep to S at the interpolated time.
        passage = t + dt * (S - x) / inc;
        landing = S;
        break;
      }
      x += inc;
      t += dt;
      while (next_arrival <= t) {
        x += model.jumps.sample(jumps);
        if (x >= S) {
          passage = next_arrival;
          landing = x;
          break;
        }
        next_arrival += jumps.exponential(model.rate);
      }
    }
    const double g = reward.gamma(landing) - reward.gamma(s);
    sum_g += g;
    sum_t += passage;
    sum_gg += g * g;
    sum_tt += passage * passage;
    sum_gt += g * passage;
  }
  const double n = static_cast<double>(cycles);
  SsValue out;
  out.mean_reward_gain = sum_g / n;
  out.mean_passage_time = sum_t / n;
  const double num = out.mean_reward_gain - K;
  out.value = num / out.mean_passage_time;
  const double vg = sum_gg / n - out.mean_reward_gain * out.mean_reward_gain;
  const double vt = sum_tt / n - out.mean_passage_time * out.mean_passage_time;
  const double cgt = sum_gt / n - out.mean_reward_gain * out.mean_passage_time;
  const double tb = out.mean_passage_time;
  const double var = (vg / (tb * tb) + num * num * vt / (tb * tb * tb * tb) - 2.0 * num * cgt / (tb * tb * tb)) / n;
  out.stderr_ = std::sqrt(std::max(0.0, var));
  return out;
}

}  // namespace ddc
