#include "ddc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "ddc/errors.hpp"
#include "ddc/exploration.hpp"
#include "ddc/kernel_density.hpp"
#include "ddc/ladder.hpp"
#include "ddc/rate_fit.hpp"
#include "ddc/singular_control.hpp"

namespace ddc {

using nlohmann::json;

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out.str();
}

namespace {

// ---------------------------------------------------------------- helpers

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(const std::vector<double>& v) { return quantile(v, 0.5); }

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::uint64_t cell_seed(const ExperimentConfig& c, std::size_t grid_index, std::size_t r) {
  return replicate_seed(c.seed + grid_index * c.replicates, r);
}

json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"slope_stderr", f.slope_stderr}, {"r_squared", f.r_squared}};
}

void add_fit_rows(CsvTable& t, const std::string& name, std::span<const double> x, std::span<const double> y,
                  const RateFit& f) {
  if (t.columns.empty())
    t.columns = {"fit", "x", "y", "log_x", "log_y", "slope", "intercept", "slope_stderr", "r_squared"};
  for (std::size_t i = 0; i < x.size(); ++i)
    t.add({name, cell(x[i]), cell(y[i]), cell(std::log(x[i])), cell(std::log(y[i])), cell(f.slope),
           cell(f.intercept), cell(f.slope_stderr), cell(f.r_squared)});
}

// Slope-window verdict on per-grid aggregates; a missing or nonpositive
// aggregate makes the fit impossible and fails the window.
void slope_window(ExperimentReport& rep, const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y, double lo, double hi) {
  json crit = {{"statistic", name + " slope"}, {"window", {lo, hi}}};
  const bool fittable = x.size() >= 3 && std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
  if (!fittable) {
    rep.passed = false;
    rep.verdict = name + ": slope unavailable (nonpositive or missing aggregate)";
    crit["passed"] = false;
    rep.summary["criterion"] = crit;
    return;
  }
  const auto f = fit_rate(x, y);
  add_fit_rows(rep.ratefit, name, x, y, f);
  rep.summary["fit"] = fit_json(f);
  rep.passed = f.slope >= lo && f.slope <= hi;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s slope %.4f (se %.4f, R2 %.3f) window [%g, %g]", name.c_str(), f.slope,
                f.slope_stderr, f.r_squared, lo, hi);
  rep.verdict = buf;
  crit["value"] = f.slope;
  crit["passed"] = rep.passed;
  rep.summary["criterion"] = crit;
}

void threshold_verdict(ExperimentReport& rep, const std::string& statistic, double value, const std::string& op,
                       double bound, bool passed) {
  rep.passed = passed;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s = %.6g %s %.6g", statistic.c_str(), value, passed ? op.c_str() : "violates",
                bound);
  rep.verdict = buf;
  rep.summary["criterion"] = {{"statistic", statistic}, {"value", value}, {"bound", bound}, {"passed", passed}};
}

// Runs body(); on exception fills the status cell and counts the failure.
template <class F>
bool guarded(ExperimentReport& rep, std::string& status, F&& body) {
  try {
    body();
    status = "ok";
    return true;
  } catch (const std::exception& e) {
    status = std::string("error: ") + e.what();
    ++rep.failures;
    return false;
  }
}

void progress(std::ostream* log, const std::string& what) {
  if (log) *log << what << std::endl;
}

RewardSpec reward_from(const ExperimentConfig& c, const char* key = "reward") {
  const json r = c.settings.contains(key) ? c.settings.at(key) : json::object();
  try {
    return make_reward(r.value("name", std::string("tanh")), r.value("centre", 0.0), r.value("scale", 1.0),
                       r.value("lo", -3.0), r.value("hi", 3.0));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("reward: ") + e.what());
  }
}

CostSpec cost_from(const ExperimentConfig& c, const InvariantDensity& rho) {
  const json s = c.settings.contains("cost") ? c.settings.at("cost") : json::object();
  CostSpec spec;
  const auto running = s.value("running", std::string("quadratic"));
  if (running == "quadratic") spec.running_cost = [](double x) { return x * x; };
  else if (running == "abs") spec.running_cost = [](double x) { return std::abs(x); };
  else throw ConfigError("unknown running cost '" + running + "' (known: quadratic, abs)");
  spec.q_up = s.value("q_up", 0.5);
  spec.q_down = s.value("q_down", 0.5);
  spec.box = s.value("box", 1.5);
  spec.floor = s.contains("floor") ? s.at("floor").get<double>() : default_floor(rho, spec.box);
  spec.validate();
  return spec;
}

std::vector<double> domain_grid(const ExperimentConfig& c, double lo, double hi, std::size_t points) {
  const auto d = c.setting<std::vector<double>>("domain", {lo, hi});
  if (d.size() != 2 || !(d[1] > d[0])) throw ConfigError("'settings.domain' must be [lo, hi] with lo < hi");
  return linspace(d[0], d[1], c.setting<std::size_t>("eval_points", points));
}

void require_min_horizon(const ExperimentConfig& c) {
  if (c.grid.front() < min_horizon())
    throw ConfigError("horizons must be at least " + cell(min_horizon()) + " for the bandwidth rule");
}

// ------------------------------------------------------- diffusion density

ExperimentReport density_rate(const ExperimentConfig& c, std::ostream* log) {
  require_min_horizon(c);
  ExperimentReport rep;
  const auto model = resolve_diffusion(c);
  const InvariantDensity rho(model);
  const auto kernel = make_order_kernel(c.setting<int>("kernel_order", 2));
  const auto grid = domain_grid(c, -1.0, 1.0, 201);
  const auto start = c.setting<std::string>("start", "stationary");
  if (start != "stationary" && start != "zero") throw ConfigError("'settings.start' must be stationary or zero");
  const auto truth = [&](double x) { return rho(x); };

  rep.rows.columns = {"horizon", "replicate", "seed", "x0", "bandwidth", "sup_risk", "status"};
  std::vector<std::vector<double>> risks(c.grid.size());
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto seed = replicate_seed(c.seed, r);
    const double x0 = start == "zero" ? 0.0 : stationary_start(rho, seed);
    std::optional<SamplePath> path;
    std::string status;
    guarded(rep, status, [&] { path = simulate_path(model, x0, c.grid.back(), c.dt, seed); });
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      const double T = c.grid[i];
      double risk = std::nan(""), h = std::nan("");
      std::string st = status;
      if (path) {
        guarded(rep, st, [&] {
          h = bandwidth(T);
          const auto samples = riemann_samples(*path).first(step_count(T, c.dt));
          const KernelDensityEstimator est(samples, kernel, h, grid.front(), grid.back());
          FunctionEstimate f{grid, est.evaluate(grid), T, h, seed, EstimateKind::density};
          risk = sup_norm_risk(f, truth);
          risks[i].push_back(risk);
        });
      }
      rep.rows.add({cell(T), cell(r), cell(seed), cell(x0), cell(h), cell(risk), cell(st)});
    }
    progress(log, "replicate " + std::to_string(r + 1) + "/" + std::to_string(c.replicates));
  }
  std::vector<double> med;
  json per = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    med.push_back(median(risks[i]));
    per.push_back({{"horizon", c.grid[i]}, {"median_sup_risk", med.back()}, {"ok", risks[i].size()}});
  }
  rep.summary["per_horizon"] = per;
  slope_window(rep, "median sup-risk", c.grid, med, c.tolerance("slope_lo", -0.65), c.tolerance("slope_hi", -0.35));
  return rep;
}

ExperimentReport nonstationary_gap(const ExperimentConfig& c, std::ostream* log) {
  require_min_horizon(c);
  ExperimentReport rep;
  const auto model = resolve_diffusion(c);
  const InvariantDensity rho(model);
  const auto kernel = make_order_kernel(c.setting<int>("kernel_order", 2));
  const auto grid = domain_grid(c, -1.0, 1.0, 201);
  const auto truth = [&](double x) { return rho(x); };

  rep.rows.columns = {"horizon", "replicate", "seed", "x0_stationary", "risk_zero_start", "risk_stationary", "gap",
                      "status"};
  std::vector<std::vector<double>> gaps(c.grid.size()), stat(c.grid.size());
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto seed = replicate_seed(c.seed, r);
    const double x0 = stationary_start(rho, seed);
    std::optional<SamplePath> zero, st;
    std::string status;
    guarded(rep, status, [&] {
      // Same Brownian increments for both arms; only the start differs.
      zero = simulate_path(model, 0.0, c.grid.back(), c.dt, seed);
      st = simulate_path(model, x0, c.grid.back(), c.dt, seed);
    });
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      const double T = c.grid[i];
      double rz = std::nan(""), rs = std::nan("");
      std::string row_status = status;
      if (zero) {
        guarded(rep, row_status, [&] {
          const double h = bandwidth(T);
          const std::size_t n = step_count(T, c.dt);
          auto risk_of = [&](const SamplePath& p) {
            const KernelDensityEstimator est(riemann_samples(p).first(n), kernel, h, grid.front(), grid.back());
            return sup_norm_risk(FunctionEstimate{grid, est.evaluate(grid), T, h, seed, EstimateKind::density}, truth);
          };
          rz = risk_of(*zero);
          rs = risk_of(*st);
          gaps[i].push_back(std::abs(rz - rs));
          stat[i].push_back(rs);
        });
      }
      rep.rows.add({cell(T), cell(r), cell(seed), cell(x0), cell(rz), cell(rs), cell(std::abs(rz - rs)),
                    cell(row_status)});
    }
    progress(log, "replicate " + std::to_string(r + 1) + "/" + std::to_string(c.replicates));
  }
  const double ratio_bound = c.tolerance("gap_ratio", 0.5);
  bool ok = true;
  json per = json::array();
  double worst_ratio = 0.0;
  std::vector<double> envelope;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double T = c.grid[i], g = median(gaps[i]), s = median(stat[i]);
    const double scaled = g * T / std::log(T);
    envelope.push_back(scaled);
    worst_ratio = std::max(worst_ratio, g / s);
    ok = ok && g <= ratio_bound * s;
    per.push_back({{"horizon", T}, {"median_gap", g}, {"median_stationary_risk", s}, {"gap_T_over_logT", scaled}});
  }
  rep.summary["per_horizon"] = per;
  rep.summary["gap_envelope_max"] = *std::max_element(envelope.begin(), envelope.end());
  bool decreasing = true;
  for (std::size_t i = 1; i < c.grid.size(); ++i) decreasing = decreasing && median(gaps[i]) <= median(gaps[i - 1]);
  rep.summary["median_gap_decreasing"] = decreasing;
  threshold_verdict(rep, "max median gap / median stationary risk", worst_ratio, "<=", ratio_bound, ok);
  return rep;
}

ExperimentReport kernel_moments(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_diffusion(c);
  const double T = c.setting<double>("horizon", 5000.0);
  const auto points = c.setting<std::size_t>("quadrature_points", 20001);
  const double mass_tol = c.tolerance("mass", 1e-6), moment_tol = c.tolerance("moments", 1e-8);
  const auto path = simulate_path(model, 0.0, T, c.dt, c.seed);
  const auto samples = riemann_samples(path);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());

  rep.rows.columns = {"order", "kernel_mass_error", "max_moment_error", "estimator_mass_error", "status"};
  double worst_moment = 0.0, worst_mass = 0.0;
  bool ok = true;
  for (double order : c.grid) {
    double kmass = std::nan(""), mom = std::nan(""), emass = std::nan("");
    std::string status;
    ok = guarded(rep, status, [&] {
           const auto k = make_order_kernel(static_cast<int>(order));
           kmass = std::abs(simpson(k, -0.5, 0.5, points) - 1.0);
           mom = 0.0;
           for (int j = 1; j <= k.order; ++j)
             mom = std::max(mom, std::abs(simpson([&](double u) { return std::pow(u, j) * k(u); }, -0.5, 0.5, points)));
           const double h = bandwidth(T);
           const double a = *lo - h, b = *hi + h;
           const KernelDensityEstimator est(samples, k, h, a, b);
           emass = std::abs(simpson([&](double x) { return est(x); }, a, b, points) - 1.0);
           worst_moment = std::max({worst_moment, mom, kmass});
           worst_mass = std::max(worst_mass, emass);
         }) && ok;
    rep.rows.add({cell(order), cell(kmass), cell(mom), cell(emass), cell(status)});
    progress(log, "order " + cell(order));
  }
  ok = ok && worst_moment <= moment_tol && worst_mass <= mass_tol;
  rep.summary["worst_kernel_moment_error"] = worst_moment;
  rep.summary["worst_estimator_mass_error"] = worst_mass;
  rep.passed = ok;
  char buf[160];
  std::snprintf(buf, sizeof buf, "max moment error %.3g (tol %.0e), max estimator mass error %.3g (tol %.0e)",
                worst_moment, moment_tol, worst_mass, mass_tol);
  rep.verdict = buf;
  rep.summary["criterion"] = {{"statistic", "moment and mass errors"},
                              {"value", {worst_moment, worst_mass}},
                              {"bound", {moment_tol, mass_tol}},
                              {"passed", ok}};
  return rep;
}

ExperimentReport variance_bound(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_diffusion(c);
  const auto kernel = make_order_kernel(c.setting<int>("kernel_order", 2));
  const double x = c.setting<double>("x", 0.0), T = c.setting<double>("horizon", 200.0);
  progress(log, "variance check over " + std::to_string(c.replicates) + " replicates");
  const auto v = variance_check(model, kernel, x, c.grid, T, c.dt, c.replicates, c.seed);
  rep.rows.columns = {"bandwidth", "variance", "variance_over_rho_h2"};
  for (std::size_t i = 0; i < c.grid.size(); ++i)
    rep.rows.add({cell(v.bandwidths[i]), cell(v.variances[i]), cell(v.ratios[i])});
  rep.summary["horizon"] = T;
  rep.summary["x"] = x;
  slope_window(rep, "variance", c.grid, v.variances, c.tolerance("slope_lo", 1.6), c.tolerance("slope_hi", 2.4));
  return rep;
}

// ------------------------------------------------------------- control

struct ControlProblem {
  DiffusionModel model;
  std::optional<InvariantDensity> rho;
  CostSpec cost;
  double value = 0.0;
};

ControlProblem control_problem(const ExperimentConfig& c) {
  ControlProblem p{resolve_diffusion(c), std::nullopt, {}, 0.0};
  p.rho.emplace(p.model);
  p.cost = cost_from(c, *p.rho);
  p.value = value(p.cost, p.model, c.setting<std::size_t>("threshold_points", 101));
  return p;
}

ControlSettings control_settings(const ExperimentConfig& c, double T, std::uint64_t seed) {
  ControlSettings s;
  s.horizon = T;
  s.dt = c.dt;
  s.seed = seed;
  s.cap_constant = c.setting<double>("cap_constant", kDefaultCapConstant);
  s.kernel_order = c.setting<int>("kernel_order", 2);
  s.threshold_points = c.setting<std::size_t>("threshold_points", 101);
  s.max_exploration_steps = c.setting<std::size_t>("max_exploration_steps", 1'000'000);
  return s;
}

ExperimentReport explore_budget(const ExperimentConfig& c, std::ostream* log) {
  require_min_horizon(c);
  ExperimentReport rep;
  const auto prob = control_problem(c);
  rep.rows.columns = {"horizon", "replicate", "seed", "explore_time", "explore_episodes", "share_scaled",
                      "episodes_scaled", "status"};
  std::vector<std::vector<double>> shares(c.grid.size()), counts(c.grid.size());
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double T = c.grid[i], scale = std::pow(T, 2.0 / 3.0);
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      ControlRunReport run;
      guarded(rep, status, [&] {
        run = run_data_driven_control(prob.model, prob.cost, control_settings(c, T, seed));
        shares[i].push_back(run.explore_time / scale);
        counts[i].push_back(static_cast<double>(run.explore_episodes) / scale);
      });
      const bool ok = status == "ok";
      rep.rows.add({cell(T), cell(r), cell(seed), ok ? cell(run.explore_time) : "nan",
                    ok ? cell(run.explore_episodes) : "nan", ok ? cell(run.explore_time / scale) : "nan",
                    ok ? cell(static_cast<double>(run.explore_episodes) / scale) : "nan", cell(status)});
    }
    progress(log, "horizon " + cell(T));
  }
  const double floor = c.tolerance("share_floor", kExploreShareFloor);
  const double ceiling = c.tolerance("episode_ceiling", kExploreEpisodeCeiling);
  bool ok = rep.failures == 0;
  json per = json::array();
  double worst_lo = INFINITY, worst_hi = 0.0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double p05 = quantile(shares[i], 0.05), p95 = quantile(counts[i], 0.95);
    worst_lo = std::min(worst_lo, p05);
    worst_hi = std::max(worst_hi, p95);
    ok = ok && p05 >= floor && p95 <= ceiling;
    per.push_back({{"horizon", c.grid[i]},
                   {"share_p05", p05},
                   {"share_median", median(shares[i])},
                   {"episodes_median", median(counts[i])},
                   {"episodes_p95", p95}});
  }
  rep.summary["per_horizon"] = per;
  rep.passed = ok;
  char buf[220];
  std::snprintf(buf, sizeof buf, "p05 S/T^(2/3) = %.4g (floor %.4g), p95 N0/T^(2/3) = %.4g (ceiling %.4g)", worst_lo,
                floor, worst_hi, ceiling);
  rep.verdict = buf;
  rep.summary["criterion"] = {{"statistic", "exploration share and episode count"},
                              {"value", {worst_lo, worst_hi}},
                              {"bound", {floor, ceiling}},
                              {"passed", ok}};
  return rep;
}

ExperimentReport control_regret(const ExperimentConfig& c, std::ostream* log) {
  require_min_horizon(c);
  ExperimentReport rep;
  const auto prob = control_problem(c);
  rep.summary["optimal_value"] = prob.value;
  rep.rows.columns = {"horizon", "replicate", "seed", "total_cost", "regret_per_time", "explore_time",
                      "explore_episodes", "estimates", "status"};
  std::vector<double> means;
  json per = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double T = c.grid[i];
    std::vector<double> regrets;
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      ControlRunReport run;
      guarded(rep, status, [&] {
        run = run_data_driven_control(prob.model, prob.cost, control_settings(c, T, seed));
        regrets.push_back(regret_per_time(run, prob.value));
      });
      const bool ok = status == "ok";
      rep.rows.add({cell(T), cell(r), cell(seed), ok ? cell(run.total_cost) : "nan",
                    ok ? cell(regret_per_time(run, prob.value)) : "nan", ok ? cell(run.explore_time) : "nan",
                    ok ? cell(run.explore_episodes) : "nan", ok ? cell(run.estimates_computed) : "nan",
                    cell(status)});
    }
    means.push_back(mean(regrets));
    double var = 0.0;
    for (double g : regrets) var += (g - means.back()) * (g - means.back());
    const double se = regrets.size() > 1 ? std::sqrt(var / static_cast<double>(regrets.size() - 1) / regrets.size()) : 0.0;
    per.push_back({{"horizon", T}, {"mean_regret", means.back()}, {"stderr", se}, {"ok", regrets.size()}});
    progress(log, "horizon " + cell(T) + " mean regret " + cell(means.back()));
  }
  rep.summary["per_horizon"] = per;
  slope_window(rep, "mean regret", c.grid, means, c.tolerance("slope_lo", -0.5), c.tolerance("slope_hi", -0.15));
  return rep;
}

ExperimentReport plugin_regret(const ExperimentConfig& c, std::ostream* log) {
  require_min_horizon(c);
  ExperimentReport rep;
  const auto prob = control_problem(c);
  const auto kernel = make_order_kernel(c.setting<int>("kernel_order", 2));
  const auto points = c.setting<std::size_t>("threshold_points", 101);
  const auto tgrid = make_threshold_grid(prob.cost.box, points);
  const CostSurface truth(prob.cost, [&](double x) { return (*prob.rho)(x); }, prob.model.volatility, tgrid,
                          DensityMode::oracle);
  const auto best = optimize_thresholds(truth);
  const auto eval = linspace(-prob.cost.box, prob.cost.box, c.setting<std::size_t>("eval_points", 601));

  rep.rows.columns = {"horizon", "replicate", "seed", "lower", "upper", "regret", "twice_sup_error", "holds",
                      "status"};
  std::size_t violations = 0;
  double worst_slack = INFINITY;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double T = c.grid[i];
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      double regret = std::nan(""), bound = std::nan("");
      OptimizedThresholds hat;
      bool holds = false;
      guarded(rep, status, [&] {
        const auto path = simulate_path(prob.model, 0.0, T, c.dt, seed);
        const auto rho_hat = estimate_density(path, kernel, eval);
        const CostSurface plug(prob.cost, [&](double x) { return rho_hat.at(x); }, prob.model.volatility, tgrid,
                               DensityMode::plugin);
        hat = optimize_thresholds(plug);
        double sup = 0.0;
        for (std::size_t a = 0; a < tgrid.lower.size(); ++a)
          for (std::size_t b = 0; b < tgrid.upper.size(); ++b) sup = std::max(sup, std::abs(truth(a, b) - plug(a, b)));
        regret = truth(hat.i, hat.j) - best.value;
        bound = 2.0 * sup;
        holds = regret <= bound;
        violations += !holds;
        worst_slack = std::min(worst_slack, bound - regret);
      });
      rep.rows.add({cell(T), cell(r), cell(seed), cell(hat.pair.lower), cell(hat.pair.upper), cell(regret),
                    cell(bound), holds ? "1" : "0", cell(status)});
    }
    progress(log, "horizon " + cell(T));
  }
  rep.summary["optimal_value"] = best.value;
  rep.summary["violations"] = violations;
  threshold_verdict(rep, "violations", static_cast<double>(violations), "==", 0.0,
                    violations == 0 && rep.failures == 0);
  rep.summary["min_slack"] = worst_slack;
  return rep;
}

// ------------------------------------------------------------------ Levy

std::vector<std::string> levy_models_from(const ExperimentConfig& c) {
  return c.setting<std::vector<std::string>>("models",
                                             {"exp-subordinator", "uniform-subordinator", "spec-neg", "pure-drift"});
}

ExperimentReport generator_identity(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  std::vector<RewardSpec> rewards{reward_from(c)};
  if (c.settings.contains("second_reward")) rewards.push_back(reward_from(c, "second_reward"));
  const double tol = c.tolerance("identity", 1e-8);
  rep.rows.columns = {"model", "reward", "x", "generator_form", "overshoot_form", "abs_diff", "status"};
  double worst = 0.0;
  for (const auto& name : levy_models_from(c)) {
    ExperimentConfig mc = c;
    mc.model = name;
    mc.model_spec = json();
    const auto model = resolve_levy(mc);
    for (const auto& rw : rewards) {
      for (double x : c.grid) {
        std::string status;
        GeneratorForms f{std::nan(""), std::nan("")};
        guarded(rep, status, [&] {
          f = generator_functional_forms(model, rw, x);
          worst = std::max(worst, std::abs(f.generator - f.overshoot));
        });
        rep.rows.add({name, rw.name, cell(x), cell(f.generator), cell(f.overshoot),
                      cell(std::abs(f.generator - f.overshoot)), cell(status)});
      }
    }
    progress(log, "model " + name);
  }
  threshold_verdict(rep, "max |generator form - overshoot form|", worst, "<=", tol, worst <= tol && rep.failures == 0);
  return rep;
}

ExperimentReport levy_exactness(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_levy(c);
  if (!model.spectrally_negative) throw ConfigError("levy-exactness needs a spectrally negative model");
  const auto rw = reward_from(c);
  const auto grid = linspace(rw.domain_lo, rw.domain_hi, c.setting<std::size_t>("eval_points", 121));
  const double eta = model.mean();
  // Rounding allowance for "exact": a few ulps of eta * sup gamma'.
  const double tol = c.tolerance("exact", 1e-12) * eta * rw.derivative_bound;
  rep.rows.columns = {"horizon", "replicate", "seed", "terminal", "case", "max_deviation", "status"};
  double worst = 0.0;
  std::size_t positive = 0, nonpositive = 0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double T = c.grid[i];
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      double xt = std::nan(""), dev = std::nan("");
      guarded(rep, status, [&] {
        const auto path = simulate_levy_path(model, T, c.dt, seed);
        const auto f = overshoot_estimator_time(path, rw, eta, grid);
        xt = path.values.back();
        dev = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const double expected = xt > 0.0 ? eta * rw.gamma_prime(grid[k]) : 0.0;
          dev = std::max(dev, std::abs(f.values[k] - expected));
        }
        (xt > 0.0 ? positive : nonpositive) += 1;
        worst = std::max(worst, dev);
      });
      rep.rows.add({cell(T), cell(r), cell(seed), cell(xt), xt > 0.0 ? "positive" : "nonpositive", cell(dev),
                    cell(status)});
    }
    progress(log, "horizon " + cell(T));
  }
  rep.summary["positive_terminal"] = positive;
  rep.summary["nonpositive_terminal"] = nonpositive;
  threshold_verdict(rep, "max deviation from eta gamma' / zero", worst, "<=", tol, worst <= tol && rep.failures == 0);
  return rep;
}

// Simulates until the running maximum reaches `level`, extending the horizon
// if needed; longer horizons reproduce the shorter path as a prefix.
LevyPath path_to_level(const LevyModel& model, double level, double dt, std::uint64_t seed) {
  double T = 1.1 * level / model.mean() + 20.0;
  for (int attempt = 0; attempt < 8; ++attempt, T *= 1.5) {
    auto p = simulate_levy_path(model, T, dt, seed);
    if (*std::max_element(p.values.begin(), p.values.end()) >= level) return p;
  }
  throw SimulationError("path did not reach level " + cell(level), 0);
}

struct LevyTarget {
  LevyModel model;
  RewardSpec reward;
  LevyOracle oracle;  // on the evaluation window around the maximiser
};

LevyTarget levy_target(const ExperimentConfig& c) {
  LevyTarget t{resolve_levy(c), reward_from(c), {}};
  if (!t.model.subordinator && !t.model.spectrally_negative)
    throw ConfigError("model '" + c.model + "' has no closed-form ladder height");
  const auto coarse = levy_oracle(t.model, t.reward, linspace(t.reward.domain_lo, t.reward.domain_hi, 601));
  const double w = c.setting<double>("half_width", 1.0);
  t.oracle = levy_oracle(t.model, t.reward,
                         linspace(coarse.best.theta - w, coarse.best.theta + w, c.setting<std::size_t>("eval_points", 101)));
  return t;
}

ExperimentReport levy_level_rate(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto t = levy_target(c);
  const auto& grid = t.oracle.f.grid;
  const auto truth = [&](double x) { return t.oracle.f.at(x); };
  rep.summary["theta_star"] = t.oracle.best.theta;
  rep.rows.columns = {"level", "replicate", "seed", "sup_risk", "status"};
  std::vector<std::vector<double>> risks(c.grid.size());
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto seed = replicate_seed(c.seed, r);
    std::optional<OvershootSeries> series;
    std::string status;
    guarded(rep, status, [&] { series = extract_overshoots(path_to_level(t.model, c.grid.back(), c.dt, seed), c.grid.back()); });
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      double risk = std::nan("");
      std::string st = status;
      if (series)
        guarded(rep, st, [&] {
          risk = sup_norm_risk(overshoot_estimator_level(*series, t.reward, t.model.mean(), c.grid[i], grid), truth);
          risks[i].push_back(risk);
        });
      rep.rows.add({cell(c.grid[i]), cell(r), cell(seed), cell(risk), cell(st)});
    }
    progress(log, "replicate " + std::to_string(r + 1) + "/" + std::to_string(c.replicates));
  }
  std::vector<double> med;
  for (auto& v : risks) med.push_back(median(v));
  slope_window(rep, "median sup-risk", c.grid, med, c.tolerance("slope_lo", -0.65), c.tolerance("slope_hi", -0.35));
  return rep;
}

ExperimentReport levy_time_rate(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto t = levy_target(c);
  const auto& grid = t.oracle.f.grid;
  const auto truth = [&](double x) { return t.oracle.f.at(x); };
  rep.summary["theta_star"] = t.oracle.best.theta;
  rep.rows.columns = {"horizon", "replicate", "seed", "terminal", "sup_risk", "theta_hat", "regret", "status"};
  std::vector<double> med, mean_regret;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    std::vector<double> risks, regrets;
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      double xt = std::nan(""), risk = std::nan(""), theta = std::nan(""), reg = std::nan("");
      guarded(rep, status, [&] {
        const auto path = simulate_levy_path(t.model, c.grid[i], c.dt, seed);
        const auto f = overshoot_estimator_time(path, t.reward, t.model.mean(), grid);
        xt = path.values.back();
        risk = sup_norm_risk(f, truth);
        theta = optimize_boundary(f).theta;
        reg = levy_regret(t.oracle, theta);
        risks.push_back(risk);
        regrets.push_back(reg);
      });
      rep.rows.add({cell(c.grid[i]), cell(r), cell(seed), cell(xt), cell(risk), cell(theta), cell(reg), cell(status)});
    }
    med.push_back(median(risks));
    mean_regret.push_back(mean(regrets));
    progress(log, "horizon " + cell(c.grid[i]));
  }
  // Regret of the plug-in boundary is reported but carries no window: on a
  // finite grid it is exactly zero for most replicates.
  json per = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i)
    per.push_back({{"horizon", c.grid[i]}, {"median_sup_risk", med[i]}, {"mean_regret", mean_regret[i]}});
  rep.summary["per_horizon"] = per;
  if (c.grid.size() >= 3 && std::all_of(mean_regret.begin(), mean_regret.end(), [](double v) { return v > 0.0; })) {
    const auto f = fit_rate(c.grid, mean_regret);
    rep.summary["regret_fit"] = fit_json(f);
    add_fit_rows(rep.ratefit, "mean regret", c.grid, mean_regret, f);
  } else {
    rep.summary["regret_fit"] = nullptr;
  }
  CsvTable regret_rows = rep.ratefit;
  rep.ratefit = {};
  slope_window(rep, "median sup-risk", c.grid, med, c.tolerance("slope_lo", -0.65), c.tolerance("slope_hi", -0.35));
  for (auto& row : regret_rows.rows) rep.ratefit.add(row);
  return rep;
}

ExperimentReport tail_bound(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_levy(c);
  const double p = c.setting<double>("p", 2.0);
  progress(log, "tail bound over " + std::to_string(c.replicates) + " replicates");
  const auto tb = tail_bound_check(model, p, c.grid, c.replicates, c.seed);
  rep.rows.columns = {"horizon", "threshold", "frequency", "bound", "mc_stderr", "within"};
  bool ok = true;
  double worst = -INFINITY;
  for (const auto& row : tb.rows) {
    rep.rows.add({cell(row.horizon), cell(row.threshold), cell(row.frequency), cell(row.bound), cell(row.stderr_),
                  row.within ? "1" : "0"});
    ok = ok && row.within;
    worst = std::max(worst, row.frequency - row.bound - 3.0 * row.stderr_);
  }
  rep.summary["beta"] = tb.beta;
  rep.summary["p"] = tb.p;
  threshold_verdict(rep, "max frequency - (bound + 3 se)", worst, "<=", 0.0, ok);
  return rep;
}

ExperimentReport overshoot_stationarity(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_levy(c);
  const auto law = stationary_overshoot_law(model);
  rep.rows.columns = {"level", "replicate", "seed", "ks_distance", "status"};
  std::vector<std::vector<double>> ks(c.grid.size());
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto seed = replicate_seed(c.seed, r);
    std::optional<OvershootSeries> series;
    std::string status;
    guarded(rep, status, [&] { series = extract_overshoots(path_to_level(model, c.grid.back(), c.dt, seed), c.grid.back()); });
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      double d = std::nan("");
      std::string st = status;
      if (series)
        guarded(rep, st, [&] {
          d = ks_distance(empirical_overshoot_distribution(*series, c.grid[i]), law);
          ks[i].push_back(d);
        });
      rep.rows.add({cell(c.grid[i]), cell(r), cell(seed), cell(d), cell(st)});
    }
    progress(log, "replicate " + std::to_string(r + 1) + "/" + std::to_string(c.replicates));
  }
  json per = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i) per.push_back({{"level", c.grid[i]}, {"median_ks", median(ks[i])}});
  rep.summary["per_level"] = per;
  const double tol = c.tolerance("ks", 0.05), m = median(ks.back());
  threshold_verdict(rep, "median KS distance at the largest level", m, "<", tol, m < tol);
  return rep;
}

ExperimentReport ss_value_consistency(const ExperimentConfig& c, std::ostream* log) {
  ExperimentReport rep;
  const auto model = resolve_levy(c);
  const auto rw = reward_from(c);
  const double K = c.setting<double>("fixed_cost", 0.0);
  const auto cycles = c.setting<std::size_t>("cycles", 500);
  const double s = c.settings.contains("s")
                       ? c.settings.at("s").get<double>()
                       : levy_oracle(model, rw, linspace(rw.domain_lo, rw.domain_hi, 601)).best.theta;
  const double target = generator_functional(model, rw, s);
  const double tol = c.tolerance("value", 0.05);
  rep.summary["s"] = s;
  rep.summary["generator_value"] = target;
  rep.rows.columns = {"epsilon", "replicate", "seed", "value", "abs_error", "mc_stderr", "mean_passage_time",
                      "status"};
  double worst = 0.0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const auto seed = cell_seed(c, i, r);
      std::string status;
      SsValue v{std::nan(""), std::nan(""), std::nan(""), std::nan("")};
      guarded(rep, status, [&] {
        v = ss_strategy_value(model, rw, s, s + c.grid[i], K, cycles, seed, c.dt);
        worst = std::max(worst, std::abs(v.value - target));
      });
      rep.rows.add({cell(c.grid[i]), cell(r), cell(seed), cell(v.value), cell(std::abs(v.value - target)),
                    cell(v.stderr_), cell(v.mean_passage_time), cell(status)});
    }
    progress(log, "epsilon " + cell(c.grid[i]));
  }
  threshold_verdict(rep, "max |(s,S) value - generator functional|", worst, "<", tol,
                    worst < tol && rep.failures == 0);
  return rep;
}

using Runner = ExperimentReport (*)(const ExperimentConfig&, std::ostream*);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> m{
      {"density-rate", density_rate},
      {"kernel-moments", kernel_moments},
      {"variance-bound", variance_bound},
      {"explore-budget", explore_budget},
      {"control-regret", control_regret},
      {"plugin-regret", plugin_regret},
      {"nonstationary-gap", nonstationary_gap},
      {"generator-identity", generator_identity},
      {"levy-exactness", levy_exactness},
      {"levy-level-rate", levy_level_rate},
      {"levy-time-rate", levy_time_rate},
      {"tail-bound", tail_bound},
      {"overshoot-stationarity", overshoot_stationarity},
      {"ss-value-consistency", ss_value_consistency},
  };
  return m;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> list{
      {"density-rate", "diffusion", "sup-norm risk of the kernel density estimator vs horizon (slope fit)"},
      {"kernel-moments", "diffusion", "mass and vanishing moments of the order-m kernels and estimator mass"},
      {"variance-bound", "diffusion", "variance of the scaled kernel occupation statistic vs bandwidth"},
      {"explore-budget", "diffusion", "exploration time and episode count of the data-driven controller"},
      {"control-regret", "diffusion", "regret per time unit of the data-driven controller vs horizon"},
      {"plugin-regret", "diffusion", "plug-in regret against twice the uniform cost-estimation error"},
      {"nonstationary-gap", "diffusion", "density risk from a fixed start vs a stationary start"},
      {"generator-identity", "levy", "agreement of the two forms of the generator functional"},
      {"levy-exactness", "levy", "time estimator on spectrally negative paths"},
      {"levy-level-rate", "levy", "sup-norm risk of the level-indexed estimator vs level"},
      {"levy-time-rate", "levy", "sup-norm risk of the time-indexed estimator vs horizon, with boundary regret"},
      {"tail-bound", "levy", "exceedance frequency of a centred process against the tail bound"},
      {"overshoot-stationarity", "levy", "KS distance of the overshoot occupation law to its stationary law"},
      {"ss-value-consistency", "levy", "Monte Carlo (s,S) value against the generator functional"},
  };
  return list;
}

bool known_experiment(const std::string& name) { return runners().count(name) > 0; }

ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* log) {
  const auto it = runners().find(config.experiment);
  if (it == runners().end()) throw ConfigError("unknown experiment '" + config.experiment + "'");
  auto rep = it->second(config, log);
  rep.experiment = config.experiment;
  rep.summary["experiment"] = config.experiment;
  rep.summary["config"] = to_json(config);
  rep.summary["config"].erase("output");  // where files go is not part of the result
  rep.summary["failures"] = rep.failures;
  rep.summary["passed"] = rep.passed;
  rep.summary["verdict"] = rep.verdict;
  return rep;
}

std::filesystem::path write_report(const ExperimentReport& report, const std::filesystem::path& root) {
  const auto dir = root / report.experiment;
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << text;
  };
  write("rows.csv", report.rows.str());
  write("summary.json", report.summary.dump(2) + "\n");
  if (!report.ratefit.columns.empty()) write("ratefit.csv", report.ratefit.str());
  else std::filesystem::remove(dir / "ratefit.csv");
  return dir;
}

}  // namespace ddc
