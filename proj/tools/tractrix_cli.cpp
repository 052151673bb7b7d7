// Command-line front end: simulate, analytic, shorten, verify, gallery.

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "tractrix/scenario.hpp"

namespace fs = std::filesystem;
using namespace tractrix;

#ifndef TRACTRIX_SCENARIOS_DIR
#define TRACTRIX_SCENARIOS_DIR "scenarios"
#endif

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "scenario file (JSON)");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "seed for randomized checks");
}

// OpenMP threads for the record kernels of a single run.
void apply_jobs(const Common& c) {
  if (c.jobs) omp_set_num_threads(*c.jobs);
}

fs::path output_dir(const Common& c, const ScenarioConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output.empty()) return cfg.output;
  return fs::path("out") / (cfg.name.empty() ? "scenario" : cfg.name);
}

int report(const RunOutcome& r, const std::string& name) {
  if (r.exit_code == 0)
    std::cout << name << ": " << r.summary << "\n";
  else
    std::cerr << name << ": " << r.summary << "\n";
  return r.exit_code;
}

int run_single(const Common& c, const std::string& command) {
  apply_jobs(c);
  ScenarioConfig cfg = load_config(c.config);
  cfg.command = command;
  if (c.seed) cfg.seed = *c.seed;
  return report(run_scenario_guarded(cfg, output_dir(c, cfg)), cfg.name);
}

struct GalleryItem {
  fs::path file;
  std::string name;
  RunOutcome outcome;
};

int run_gallery(const std::string& dir, const std::string& out, int jobs,
                std::optional<std::uint64_t> seed) {
  std::vector<GalleryItem> items;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") items.push_back({e.path(), {}, {}});
  std::sort(items.begin(), items.end(),
            [](const GalleryItem& a, const GalleryItem& b) { return a.file < b.file; });

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      GalleryItem& it = items[i];
      it.name = it.file.stem().string();
      try {
        ScenarioConfig cfg = load_config(it.file);
        if (seed) cfg.seed = *seed;
        it.name = cfg.name;
        it.outcome = run_scenario_guarded(cfg, fs::path(out) / it.file.stem());
      } catch (const Error& e) {
        it.outcome.exit_code = exit_code_for(e.code());
        it.outcome.summary = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& it : items) code = std::max(code, report(it.outcome, it.name));
  std::cout << items.size() << " scenarios written to " << out << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tractor/tractrix simulations, closed forms, curve shortening and comparison checks"};
  app.require_subcommand(1);

  Common sim, shorten, verify, analytic, gallery;
  auto* c_sim = app.add_subcommand("simulate", "simulate a scenario: trace.csv, sweep.txt, cusps.txt");
  add_common(c_sim, sim, true);

  auto* c_an = app.add_subcommand("analytic", "space-form closed forms: analytic.csv, le.txt");
  add_common(c_an, analytic, false);
  double K = 0.0, ell = 1.0, d0 = 0.5, s_max = 10.0;
  int samples = 201;
  bool long_pole = false;
  c_an->add_option("--K", K, "curvature");
  c_an->add_option("--ell", ell, "pole length");
  c_an->add_option("--d0", d0, "initial distance");
  c_an->add_option("--s-max", s_max, "end of the s-grid");
  c_an->add_option("--samples", samples, "number of s samples");
  c_an->add_flag("--long-pole", long_pole, "allow pi/2 < k ell < pi on the sphere");

  auto* c_sh = app.add_subcommand("shorten", "curve shortening: history.csv, iter_<n>.csv");
  add_common(c_sh, shorten, true);

  auto* c_ver = app.add_subcommand("verify", "comparison checks: report.txt");
  add_common(c_ver, verify, true);

  auto* c_gal = app.add_subcommand("gallery", "run every bundled scenario");
  add_common(c_gal, gallery, false);
  std::string gallery_dir = TRACTRIX_SCENARIOS_DIR;
  c_gal->add_option("--dir", gallery_dir, "scenario directory")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (*c_sim) return run_single(sim, "simulate");
    if (*c_sh) return run_single(shorten, "shorten");
    if (*c_ver) return run_single(verify, "verify");
    if (*c_an) {
      if (!analytic.config.empty()) return run_single(analytic, "analytic");
      apply_jobs(analytic);
      ScenarioConfig cfg;
      cfg.name = "analytic";
      cfg.command = "analytic";
      cfg.analytic.K = K;
      cfg.analytic.ell = ell;
      cfg.analytic.d0 = d0;
      cfg.analytic.s_max = s_max;
      cfg.analytic.samples = samples;
      cfg.analytic.long_pole = long_pole;
      if (!(ell > 0.0) || samples < 2 || !(s_max > 0.0)) {
        std::cerr << "analytic: need ell > 0, s-max > 0 and samples >= 2\n";
        return 1;
      }
      return report(run_scenario_guarded(cfg, output_dir(analytic, cfg)), cfg.name);
    }
    if (*c_gal)
      return run_gallery(gallery_dir, gallery.out.empty() ? "gallery" : gallery.out, gallery.jobs.value_or(1),
                         gallery.seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
