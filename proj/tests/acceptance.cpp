#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tractrix/comparison.hpp"
#include "tractrix/error.hpp"
#include "tractrix/functionals.hpp"
#include "tractrix/scenario.hpp"
#include "tractrix/shortening.hpp"
#include "tractrix/simulate.hpp"
#include "tractrix/spaceform.hpp"

using namespace tractrix;

namespace {

ScenarioConfig scenario(const std::string& name) {
  return load_config(std::string(TRACTRIX_SCENARIOS) + "/" + name + ".json");
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [FAILED: " << what << "]";
    }
  }
};

double max_kappa(const TractrixTrace& tr) {
  double k = 0.0;
  for (const auto& rec : tr.records)
    if (!rec.singular && std::isfinite(rec.kappa)) k = std::max(k, rec.kappa);
  return k;
}

TractrixTrace window(const TractrixTrace& tr, double a, double b) {
  TractrixTrace w = tr;
  w.records.clear();
  w.cusps.clear();
  for (const auto& r : tr.records)
    if (r.t >= a - 1e-9 && r.t <= b + 1e-9) w.records.push_back(r);
  return w;
}

void classical(Result& r) {
  const auto cfg = scenario("classical");
  const auto start = std::chrono::steady_clock::now();
  const auto tr = simulate_scenario(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double dist = 0.0, kap = 0.0;
  for (const auto& rec : tr.records) {
    dist = std::max(dist, std::abs(rec.d - 2 * std::exp(-rec.s / 2)));
    if (rec.s >= 0.05) {
      const double k = std::exp(-rec.s / 2) / (2 * std::sqrt(1 - std::exp(-rec.s)));
      kap = std::max(kap, rel(rec.kappa, k));
    }
  }
  r.detail << "max|d-2e^{-s/2}| " << dist << ", max rel kappa err " << kap << ", runtime " << secs
           << " s";
  r.require(dist < 1e-6, "distance");
  r.require(kap < 1e-4, "curvature");
  r.require(secs < 5.0, "runtime");
}

// Tractor length predicted from tractrix data alone: arc length of the gamma
// polyline, finite-difference geodesic curvature and J_s(ell), trapezoid rule.
// Returns {predicted, eta polyline} over the panels where the finite
// difference is defined.
std::pair<double, double> length_from_tractrix(const TractrixTrace& tr) {
  const auto& rec = tr.records;
  auto f = [&](std::size_t i) { return std::hypot(1.0, rec[i].kappa_fd * rec[i].jacobi_ell); };
  double pred = 0.0, eta = 0.0;
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    if (!std::isfinite(f(i)) || !std::isfinite(f(i + 1))) continue;
    const Vec gm = 0.5 * (rec[i].gamma + rec[i + 1].gamma);
    pred += 0.5 * (f(i) + f(i + 1)) * tr.model.norm(gm, rec[i + 1].gamma - rec[i].gamma);
    const Vec em = 0.5 * (rec[i].eta + rec[i + 1].eta);
    eta += tr.model.norm(em, rec[i + 1].eta - rec[i].eta);
  }
  return {pred, eta};
}

void length_identity(Result& r) {
  double worst = 0.0;
  for (const char* name : {"classical", "sphere_equator", "hyperbolic", "paraboloid", "hilly"}) {
    const auto tr = simulate_scenario(scenario(name));
    const auto [pred, eta] = length_from_tractrix(tr);
    const double e = rel(pred, eta);
    const double e2 = rel(tractor_length(tr), tractor_polyline_length(tr));
    r.detail << name << " " << e << "; ";
    r.require(std::isfinite(e) && std::isfinite(e2) && eta > 0.9 * tractor_polyline_length(tr),
              name);
    worst = std::max({worst, e, e2});
  }
  r.detail << "max rel err " << worst;
  r.require(worst < 1e-3, "length identity");
}

void constant_k_area(Result& r) {
  const auto s = simulate_scenario(scenario("sphere_equator"));
  const auto h = simulate_scenario(scenario("hyperbolic"));
  r.require(s.ell == 1.0 && h.ell == 1.0, "pole length 1");
  const double es = rel(sweep_area(s), (1 - std::cos(1.0)) * total_curvature(s));
  const double eh = rel(sweep_area(h), (std::cosh(1.0) - 1) * total_curvature(h));
  r.detail << "sphere rel err " << es << ", hyperbolic rel err " << eh;
  r.require(es < 1e-3 && eh < 1e-3, "area formula");
}

void flat_area(Result& r) {
  double worst = 0.0;
  for (const char* name : {"classical", "classical_cusp"}) {
    const auto tr = simulate_scenario(scenario(name));
    worst = std::max(worst, rel(sweep_area(tr), 0.5 * tr.ell * tr.ell * total_curvature(tr)));
  }
  // Half classical tractrix cut at s = 12 ell: t = ell acosh(e^12).
  auto cfg = scenario("classical_half");
  const double ell = cfg.ell;
  cfg.tractor.t1 = ell * std::acosh(std::exp(12.0));
  const auto tr = simulate_scenario(cfg);
  const double smax = tractrix_length(tr);
  const double K = total_curvature(tr), A = sweep_area(tr);
  worst = std::max(worst, rel(A, 0.5 * ell * ell * K));
  r.detail << "max rel err A vs ell^2 K/2 " << worst << "; s_max/ell " << smax / ell << ", |K-pi/2| "
           << std::abs(K - M_PI / 2) << ", |A-ell^2 pi/4| " << std::abs(A - ell * ell * M_PI / 4);
  r.require(worst < 1e-3, "flat area");
  r.require(std::abs(smax / ell - 12) < 1e-3, "s_max");
  r.require(std::abs(K - M_PI / 2) < 1e-3, "total curvature limit");
  r.require(std::abs(A - ell * ell * M_PI / 4) < 1e-3, "area limit");
}

void leading_exponents(Result& r) {
  struct Case {
    const char* name;
    double expected;
  };
  const double q = std::sqrt(0.5);
  for (const Case& c : {Case{"classical", -0.5}, Case{"hyperbolic", -1 / std::tanh(1.0)},
                        Case{"sphere_k05", -q / std::tan(q)}}) {
    const auto tr = simulate_scenario(scenario(c.name));
    std::vector<double> s, d;
    for (const auto& rec : tr.records)
      if (rec.t >= 0.0 && rec.s > 0.0 && rec.has_d) {
        s.push_back(rec.s);
        d.push_back(rec.d);
      }
    const auto fit = leading_exponent_estimate(s, d);
    const double e = rel(fit.slope, c.expected);
    r.detail << c.name << " Le " << fit.slope << " (rel err " << e << ", R2 " << fit.r2 << "); ";
    r.require(e < 0.01 && fit.r2 > 0.999, c.name);
  }
}

void monotone(Result& r) {
  const std::vector<double> Ks{-1.0, -0.5, 0.0, 0.5, 0.9};
  std::vector<SpaceFormSolution> sols;
  for (double K : Ks) sols.push_back(solve_from_d0(K, M_PI / 2, M_PI / 4));
  std::size_t violations = 0, samples = 0;
  for (int i = 1; i <= 600; ++i) {
    const double s = 0.01 * i;
    for (std::size_t k = 1; k < sols.size(); ++k) {
      ++samples;
      if (!(dist_at(sols[k - 1], s) < dist_at(sols[k], s))) ++violations;
      if (!(kappa_at(sols[k - 1], s) < kappa_at(sols[k], s))) ++violations;
    }
  }
  r.detail << samples << " sample pairs, " << violations << " violations";
  r.require(violations == 0, "ordering");
}

void toponogov(Result& r) {
  for (const char* name : {"verify_flat", "verify_ellipsoid"}) {
    const auto cfg = scenario(name);
    const auto tr = simulate_scenario(cfg);
    const auto b = certify_bounds(tr.model, visited_region(tr, cfg.sim.pole_step), {},
                                  cfg.comparison.K_lo, cfg.comparison.K_hi);
    const auto rep = toponogov_sandwich_check(tr, b);
    std::size_t violations = 0, samples = 0;
    for (const auto& c : rep.checks) {
      violations += c.violations;
      samples += c.samples;
      r.require(c.status == Check::Status::Pass, std::string(name) + " " + c.name);
    }
    r.detail << name << " K in (" << b.K_lo << ", " << b.K_hi << "): " << samples << " samples, "
             << violations << " violations; ";
    r.require(violations == 0 && samples > 0, name);
  }
}

void rauch(Result& r) {
  std::size_t scenarios = 0, evaluated = 0;
  for (const char* name :
       {"classical", "classical_cusp", "classical_half", "fenchel_circle", "fenchel_nonplanar",
        "geodesic_aligned", "helix3d", "hilly", "hyperbolic", "paraboloid", "pseudosphere",
        "sphere_equator", "sphere_k05", "sphere_long_pole", "sphere_parallel", "sphere_quarter",
        "verify_ellipsoid", "verify_flat", "verify_geodesic", "verify_hilly", "verify_hyperbolic",
        "verify_paraboloid", "verify_pseudosphere", "verify_sphere"}) {
    const auto cfg = scenario(name);
    const auto tr = simulate_scenario(cfg);
    CertifyOptions co;
    co.constant_pad = cfg.comparison.constant_pad;
    co.grid_margin = cfg.comparison.grid_margin;
    co.grid = cfg.comparison.grid;
    const auto b = certify_bounds(tr.model, visited_region(tr, cfg.sim.pole_step), co,
                                  cfg.comparison.K_lo, cfg.comparison.K_hi);
    const auto rep = rauch_length_area_check(tr, b);
    ++scenarios;
    double mmax = 0.0;
    for (const auto& c : rep.checks) {
      r.require(c.status == Check::Status::Pass, std::string(name) + " " + c.name + " " +
                                                      to_string(c.status) + " " + c.note);
      evaluated += c.status == Check::Status::Pass;
      mmax = std::max(mmax, std::abs(c.margin));
    }
    // Equality in all four exactly when the tractrix is a geodesic.
    const bool geodesic = max_kappa(tr) < 1e-9;
    r.require((mmax < 1e-6) == geodesic, std::string(name) + " equality characterization");
    if (geodesic) r.detail << name << " max |margin| " << mmax << "; ";
  }
  r.detail << scenarios << " scenarios, " << evaluated << " inequalities passed";
}

void duality(Result& r) {
  const auto cfg = scenario("sphere_long_pole");
  const auto sphere = build_model(cfg.model);
  const auto eq = build_tractor(cfg, sphere);
  const Vec g0 = build_gamma0(cfg, sphere, eq);
  const auto pull = simulate(sphere, eq, g0, 3 * M_PI / 4, cfg.sim);
  const auto anti = sphere_equator(1.0, cfg.tractor.phi0 - M_PI, cfg.tractor.t0, cfg.tractor.t1);
  const auto push = simulate(sphere, anti, g0, M_PI / 4, cfg.sim);
  double err = 0.0;
  r.require(push.records.size() == pull.records.size(), "record counts");
  for (std::size_t i = 0; i < std::min(pull.records.size(), push.records.size()); ++i)
    err = std::max(err, (push.records[i].gamma - pull.records[i].gamma).norm());
  bool pushed = true;
  for (const auto& rec : push.records) pushed = pushed && rec.sigma == -1;
  r.detail << "pull 3pi/4 vs push pi/4: max |gamma diff| " << err;
  r.require(err < 1e-6 && pushed, "duality");

  const auto par = simulate_scenario(scenario("sphere_parallel"));
  double dmin = INFINITY, dmax = -INFINITY;
  for (const auto& rec : par.records) {
    dmin = std::min(dmin, rec.d);
    dmax = std::max(dmax, rec.d);
  }
  r.detail << "; ell = pi/2: d in [" << dmin << ", " << dmax << "]";
  r.require(dmax - dmin < 1e-6, "constant distance");
}

void shortening(Result& r) {
  auto last = [](const ShorteningRun& run) { return run.iterates.back().length; };
  auto monotone = [](const ShorteningRun& run) {
    for (std::size_t i = 1; i < run.iterates.size(); ++i)
      if (run.iterates[i].length > run.iterates[i - 1].length + 1e-9) return false;
    return true;
  };
  const auto flat = shorten_scenario(scenario("shorten_flat"));
  const auto sph = shorten_scenario(scenario("shorten_sphere"));
  const auto torus = shorten_scenario(scenario("shorten_torus"));
  const auto cyl = shorten_scenario(scenario("shorten_cylinder"));
  const auto hilly = shorten_scenario(scenario("shorten_hilly"));
  const std::size_t flat_iter = flat.iterates.size() - 1;
  r.detail << "flat |L-10| " << std::abs(last(flat) - 10) << " in " << flat_iter
           << " iterations; sphere |L-pi/2| " << std::abs(last(sph) - M_PI / 2) << "; torus |L-1| "
           << std::abs(last(torus) - 1);
  r.require(std::abs(last(flat) - 10) < 1e-4 && flat_iter <= 50, "flat chord");
  r.require(std::abs(last(sph) - M_PI / 2) < 1e-3, "sphere arc");
  r.require(std::abs(last(torus) - 1) < 1e-3, "torus loop");
  for (const auto* run : {&flat, &sph, &torus, &cyl, &hilly})
    r.require(monotone(*run), "monotone lengths");
}

void fenchel(Result& r) {
  const auto circ = simulate_scenario(scenario("fenchel_circle"));
  const double Ac = sweep_area(circ);
  const auto tr = simulate_scenario(scenario("fenchel_nonplanar"));
  const auto lap = window(tr, 10 * M_PI, 12 * M_PI);
  const double A = sweep_area(lap);
  const double gap = (lap.records.front().gamma - lap.records.back().gamma).norm();
  r.detail << "circle |A-pi| " << std::abs(Ac - M_PI * circ.ell * circ.ell) << "; non-planar lap A "
           << A << " vs pi ell^2 " << M_PI * tr.ell * tr.ell << ", closure gap " << gap;
  r.require(std::abs(Ac - M_PI * circ.ell * circ.ell) < 1e-3, "circle");
  r.require(A > M_PI * tr.ell * tr.ell, "non-planar");
  r.require(gap < 2 * tr.dt, "closed lap");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Result&)>>> criteria{
      {"classical tractrix reproduction", classical},
      {"length identity on five surfaces", length_identity},
      {"constant-curvature area formula", constant_k_area},
      {"flat sweep area and half-tractrix limit", flat_area},
      {"leading exponents", leading_exponents},
      {"monotone comparison in K", monotone},
      {"distance sandwich", toponogov},
      {"length and area comparison inequalities", rauch},
      {"long-pole duality", duality},
      {"curve shortening", shortening},
      {"closed tractrices sweep at least pi ell^2", fenchel},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      criteria[i].second(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " [EXCEPTION: " << e.what() << "]";
    }
    failed += !r.pass;
    std::printf("%s %2zu %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                r.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
