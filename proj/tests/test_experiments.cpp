#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddc/config.hpp"
#include "ddc/experiments.hpp"
#include "ddc/rate_fit.hpp"
#include "doctest.h"

using namespace ddc;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json base(const char* experiment) {
  return {{"experiment", experiment}, {"grid", {5000, 6000, 7000}}, {"replicates", 1}, {"seed", 5}};
}

}  // namespace

TEST_CASE("rate fit") {
  std::vector<double> x{10, 100, 1000, 10000}, y, z;
  for (double v : x) {
    y.push_back(std::pow(v, -0.5));
    z.push_back(7.0 * std::pow(v, -1.0 / 3.0));
  }
  const auto f = fit_rate(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(std::isfinite(f.slope_stderr));
  CHECK(fit_rate(x, z).slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(fit_rate(x, z).intercept == doctest::Approx(std::log(7.0)));
  std::vector<double> two{1, 2};
  CHECK_THROWS(fit_rate(two, two));
  std::vector<double> bad{1, 0, 2};
  CHECK_THROWS(fit_rate(bad, std::vector<double>{1, 1, 1}));
}

TEST_CASE("config parsing and validation") {
  const auto c = parse_config(base("density-rate"));
  CHECK(c.model == "ou");
  CHECK(c.replicates == 1);
  CHECK(c.tolerance("slope_lo", -9.0) == -9.0);

  auto j = base("density-rate");
  j["grid"] = {3, 2};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base("density-rate");
  j["replicates"] = 0;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base("density-rate");
  j["replicate"] = 3;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("replicate"), ConfigError);
  j = base("density-rate");
  j["grid"] = json::array();
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = base("x");
  j["grid"] = {{"from", -1}, {"to", 1}, {"points", 5}};
  CHECK(parse_config(j).grid == std::vector<double>{-1, -0.5, 0, 0.5, 1});
  j["grid"] = {{"from", 250}, {"factor", 2}, {"points", 5}};
  CHECK(parse_config(j).grid == std::vector<double>{250, 500, 1000, 2000, 4000});

  j = base("density-rate");
  j["model"] = "no-such-model";
  CHECK_THROWS_AS(resolve_diffusion(parse_config(j)), ConfigError);
  for (const auto& name : diffusion_registry()) {
    j["model"] = name;
    CHECK_NOTHROW(resolve_diffusion(parse_config(j)));
  }
  j["model"] = {{"drift", "ou"}, {"drift_scale", 0.01}};
  CHECK_THROWS_WITH_AS(resolve_diffusion(parse_config(j)), doctest::Contains("mean-reversion"), ConfigError);

  j = base("tail-bound");
  j["model"] = {{"name", "mine"}, {"drift", 0.0}, {"sigma", 1.0}, {"rate", 0.0}, {"jump_law", "none"}};
  CHECK(resolve_levy(parse_config(j)).name == "mine");

  const auto round = parse_config(to_json(c));
  CHECK(round.grid == c.grid);
  CHECK(round.seed == c.seed);
}

TEST_CASE("unknown experiment is a usage error") {
  CHECK_THROWS_AS(run_experiment(parse_config(base("nope"))), ConfigError);
  CHECK_FALSE(known_experiment("nope"));
  for (const auto& e : experiment_catalog()) CHECK(known_experiment(e.name));
}

TEST_CASE("one replicate gives one row per horizon and a summary") {
  auto j = base("control-regret");
  j["grid"] = {5000};
  const auto rep = run_experiment(parse_config(j));
  CHECK(rep.rows.rows.size() == 1);
  CHECK(rep.summary.contains("optimal_value"));
  CHECK(rep.summary["failures"] == 0);
  CHECK_FALSE(rep.passed);  // a one-point grid has no slope
}

TEST_CASE("same config twice gives byte-identical files") {
  const auto dir = std::filesystem::temp_directory_path() / "ddc_test_experiments";
  auto j = base("levy-time-rate");
  j["model"] = "uniform-subordinator";
  j["grid"] = {50, 100, 200};
  j["replicates"] = 3;
  j["dt"] = 1e-3;
  const auto cfg = parse_config(j);
  const auto a = write_report(run_experiment(cfg), dir / "a");
  const auto b = write_report(run_experiment(cfg), dir / "b");
  for (const char* f : {"rows.csv", "summary.json", "ratefit.csv"}) {
    INFO(f);
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "rows.csv").rfind("horizon,replicate,seed,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("failed replicates are recorded and the run continues") {
  auto j = base("plugin-regret");
  j["grid"] = {5000};
  j["replicates"] = 2;
  j["dt"] = 0.5;  // violates the Euler step bound, so every replicate throws
  const auto rep = run_experiment(parse_config(j));
  CHECK(rep.failures == 2);
  REQUIRE(rep.rows.rows.size() == 2);
  CHECK(rep.rows.rows[0].back().find("error:") != std::string::npos);
  CHECK_FALSE(rep.passed);

  j = base("density-rate");
  j["grid"] = {100, 5000, 6000};
  CHECK_THROWS_AS(run_experiment(parse_config(j)), ConfigError);
}

TEST_CASE("csv cells") {
  CHECK(cell(0.1) == "0.1");
  CHECK(cell(std::nan("")) == "nan");
  CHECK(cell(std::size_t{12}) == "12");
  CHECK(cell(std::string("a,b")) == "\"a,b\"");
  CHECK(cell(std::string("say \"x\"")) == "\"say \"\"x\"\"\"");
  CsvTable t{{"a", "b"}, {{"1", "2"}}};
  CHECK(t.str() == "a,b\n1,2\n");
}
