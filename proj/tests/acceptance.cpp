// Acceptance gate: runs every checked-in experiment config at full size and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ddc/config.hpp"
#include "ddc/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  const char* experiment;
  const char* title;
};

const Criterion kCriteria[] = {
    {1, "density-rate", "density sup-risk rate"},
    {2, "kernel-moments", "kernel mass and moments"},
    {3, "variance-bound", "variance vs bandwidth"},
    {4, "explore-budget", "exploration budget"},
    {5, "control-regret", "diffusion regret rate"},
    {6, "plugin-regret", "plug-in regret inequality"},
    {7, "generator-identity", "generator functional identity"},
    {8, "levy-exactness", "spectrally negative exactness"},
    {9, "levy-level-rate", "Levy level-indexed rate"},
    {10, "levy-time-rate", "Levy time-indexed rate"},
    {11, "tail-bound", "tail bound"},
    {12, "overshoot-stationarity", "overshoot stationarity"},
    {13, "ss-value-consistency", "(s,S) value consistency"},
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Reduced copy of a config for the determinism re-runs.
ddc::ExperimentConfig smoke(ddc::ExperimentConfig c) {
  c.replicates = c.experiment == "tail-bound" ? 500 : std::min<std::size_t>(c.replicates, 2);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string config_dir = DDC_CONFIG_DIR;
  std::string work_dir = (fs::temp_directory_path() / "ddc_acceptance").string();
  std::string report_file;
  std::vector<int> only;
  app.add_option("--configs", config_dir, "directory with <experiment>.json files");
  app.add_option("--work", work_dir, "scratch directory for report files");
  app.add_option("--only", only, "run only these criterion numbers");
  app.add_option("--report", report_file, "also write the PASS/FAIL lines to this file");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id); };

  int failed = 0;
  std::ofstream report;
  if (!report_file.empty()) report.open(report_file, std::ios::trunc);
  auto line = [&](int id, const std::string& title, bool ok, const std::string& detail, double secs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s  [%2d] %-32s %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(),
                  detail.c_str(), secs);
    std::fputs(buf, stdout);
    std::fflush(stdout);
    if (report) report << buf << std::flush;
    failed += !ok;
  };

  for (const auto& c : kCriteria) {
    if (!wanted(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto cfg = ddc::load_config(fs::path(config_dir) / (std::string(c.experiment) + ".json"));
      const auto rep = ddc::run_experiment(cfg);
      ddc::write_report(rep, fs::path(work_dir) / "full");
      line(c.id, c.title, rep.passed, rep.verdict, seconds_since(t0));
    } catch (const std::exception& e) {
      line(c.id, c.title, false, std::string("error: ") + e.what(), seconds_since(t0));
    }
  }

  if (wanted(14)) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string mismatch;
    try {
      for (const auto& c : kCriteria) {
        const auto cfg = smoke(ddc::load_config(fs::path(config_dir) / (std::string(c.experiment) + ".json")));
        const auto a = ddc::write_report(ddc::run_experiment(cfg), fs::path(work_dir) / "first");
        const auto b = ddc::write_report(ddc::run_experiment(cfg), fs::path(work_dir) / "second");
        for (const char* f : {"rows.csv", "ratefit.csv"}) {
          if (fs::exists(a / f) != fs::exists(b / f) || slurp(a / f) != slurp(b / f))
            mismatch += std::string(mismatch.empty() ? "" : ", ") + c.experiment + "/" + f;
        }
      }
      line(14, "determinism", mismatch.empty(),
           mismatch.empty() ? "13 experiments re-run with byte-identical CSVs" : "differs: " + mismatch,
           seconds_since(t0));
    } catch (const std::exception& e) {
      line(14, "determinism", false, std::string("error: ") + e.what(), seconds_since(t0));
    }
  }
  std::printf("%d criterion/criteria failed\n", failed);
  if (report) report << failed << " criterion/criteria failed\n";
  return failed;
}
