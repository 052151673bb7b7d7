#include <cmath>
#include <vector>

#include "doctest.h"
#include "tractrix/error.hpp"
#include "tractrix/io.hpp"
#include "tractrix/scenario.hpp"
#include "tractrix/simulate.hpp"
#include "tractrix/spaceform.hpp"

using namespace tractrix;

namespace {

ScenarioConfig scenario(const char* name) {
  return load_config(std::string(TRACTRIX_SCENARIOS) + "/" + name + ".json");
}

TractorCurve flat_line(double t0, double t1, Vec p = vec2(0, 0), Vec v = vec2(1, 0)) {
  return TractorCurve::geodesic(ManifoldModel::space_form(2, 0.0), p, v, t0, t1);
}

TractorCurve circle(double R, double t0, double t1) {
  FourierCurve c;
  c.coords = {{0.0, 0.0, {{1, R, 0}}}, {0.0, 0.0, {{1, 0, R}}}};
  return TractorCurve::analytic(c, t0, t1);
}

TraceRecord rec(double t, double speed) {
  TraceRecord r;
  r.t = t;
  r.s = t;
  r.speed = speed;
  r.eta_speed = 1.0;
  return r;
}

}  // namespace

TEST_CASE("euclidean_rhs examples") {
  CHECK((euclidean_rhs(vec2(2, 0), vec2(1, 0), vec2(0, 0), 2.0) - vec2(1, 0)).norm() == 0.0);
  CHECK(euclidean_rhs(vec2(2, 0), vec2(0, 1), vec2(0, 0), 2.0).norm() == 0.0);
  try {
    euclidean_rhs(vec2(2.1, 0), vec2(1, 0), vec2(0, 0), 2.0);
    FAIL("expected PoleLengthDrift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleLengthDrift);
  }
}

TEST_CASE("classical tractrix against its closed form") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  const double ell = 2.0;
  const auto tr = simulate(flat, flat_line(0, 10), vec2(0, 2), ell);
  double pos = 0.0, dist = 0.0, kap = 0.0;
  for (const auto& r : tr.records) {
    const Vec exact = vec2(r.t - ell * std::tanh(r.t / ell), ell / std::cosh(r.t / ell));
    pos = std::max(pos, (r.gamma - exact).norm());
    dist = std::max(dist, std::abs(r.d - ell * std::exp(-r.s / ell)));
    if (r.s >= 0.05) {
      const double k = std::exp(-r.s / 2) / (2 * std::sqrt(1 - std::exp(-r.s)));
      kap = std::max(kap, std::abs(r.kappa / k - 1));
    }
  }
  CHECK(pos < 1e-6);
  CHECK(dist < 1e-6);
  CHECK(kap < 1e-4);
  // The start is the cusp itself: stationary, no reversal inside the run.
  REQUIRE(tr.cusps.size() == 1);
  CHECK(tr.cusps.front().s == 0.0);
  CHECK(tr.cusps.front().turning_angle == 0.0);
}

TEST_CASE("geodesic-aligned start keeps the tractrix on the tractor line") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  for (bool push : {false, true}) {
    const Vec g0 = push ? vec2(2, 0) : vec2(-2, 0);
    const auto tr = simulate(flat, flat_line(0, 5), g0, 2.0);
    for (const auto& r : tr.records) {
      CHECK(std::abs(r.kappa) < 1e-12);
      CHECK(std::abs(r.d) < 1e-10);
      CHECK(r.sigma == (push ? -1 : 1));
    }
  }
}

TEST_CASE("long pole on the sphere follows the closed form") {
  auto cfg = scenario("sphere_long_pole");
  const auto tr = simulate_scenario(cfg);
  const auto sol = solve_from_d0(1.0, 3 * M_PI / 4, 3 * M_PI / 80, true);
  double err = 0.0;
  for (const auto& r : tr.records) err = std::max(err, std::abs(r.d - dist_at(sol, r.s)));
  CHECK(err < 1e-5);
}

TEST_CASE("detect_cusp on synthetic windows") {
  const std::vector<TraceRecord> flip{rec(0, -1), rec(1, 0), rec(2, 1)};
  const auto c = detect_cusp(flip, 1e-9);
  REQUIRE(c);
  CHECK(c->t == 1.0);
  CHECK(c->turning_angle == doctest::Approx(M_PI));

  const std::vector<TraceRecord> cross{rec(0, -1), rec(1, 3), rec(2, 4)};
  const auto c2 = detect_cusp(cross, 1e-9);
  REQUIRE(c2);
  CHECK(c2->t == doctest::Approx(0.25));

  const std::vector<TraceRecord> pull{rec(0, 1), rec(1, 2), rec(2, 1)};
  CHECK_FALSE(detect_cusp(pull, 1e-9));
}

TEST_CASE("classical tractrix through its cusp") {
  const auto tr = simulate_scenario(scenario("classical_cusp"));
  REQUIRE(tr.cusps.size() == 1);
  const auto& c = tr.cusps.front();
  CHECK(std::abs(c.t) < 0.02);
  CHECK(c.turning_angle == doctest::Approx(M_PI).epsilon(1e-3));
  // Arclength never decreases; the sign changes only at the cusp.
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    CHECK(tr.records[i].s >= tr.records[i - 1].s);
    if (tr.records[i].sigma != tr.records[i - 1].sigma) {
      CHECK(i >= c.first);
      CHECK(i <= c.last + 1);
    }
  }
  CHECK(tr.records.front().sigma == -1);
  CHECK(tr.records.back().sigma == 1);
}

TEST_CASE("pure pull has no cusp") {
  // Start at t = 0.5 on the classical tractrix, away from the cusp at t = 0.
  const auto flat = ManifoldModel::space_form(2, 0.0);
  const double t0 = 0.5;
  const auto tr = simulate(flat, flat_line(t0, 10),
                           vec2(t0 - 2 * std::tanh(t0 / 2), 2 / std::cosh(t0 / 2)), 2.0);
  CHECK(tr.cusps.empty());
  for (const auto& r : tr.records) CHECK(r.sigma == 1);
}

TEST_CASE("circle tractor of radius ell around a stationary tractrix") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  const auto tr = simulate(flat, circle(1.0, 0, 2 * M_PI), vec2(0, 0), 1.0);
  for (const auto& r : tr.records) CHECK(r.gamma.norm() < 1e-12);
  REQUIRE(tr.cusps.size() == 1);
  CHECK(tr.cusps.front().pole_rotation == doctest::Approx(2 * M_PI).epsilon(1e-9));
  CHECK(tr.cusps.front().turning_angle == doctest::Approx(2 * M_PI).epsilon(1e-9));
}

TEST_CASE("pushing retraces the pulled tractrix backwards") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  const auto line = flat_line(0, 5);
  const auto pull = simulate(flat, line, vec2(0, 2), 2.0);
  const auto push = pushed_simulate(flat, line, pull.records.back().gamma, 2.0);
  REQUIRE(push.records.size() == pull.records.size());
  const std::size_t n = pull.records.size();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    err = std::max(err, (push.records[i].gamma - pull.records[n - 1 - i].gamma).norm());
  CHECK(err < 1e-6);
  for (const auto& r : push.records) CHECK(r.sigma == -1);
}

TEST_CASE("sphere: pull with ell equals push with pi - ell from the antipodal tractor") {
  const auto sphere = ManifoldModel::space_form(2, 1.0);
  const double ell = M_PI / 4, t1 = 3.0;
  const auto eq = sphere_equator(1.0, 0.0, 0.0, t1);
  const Vec g0 = place_at_offset(sphere, eq, ell, M_PI / 8);
  const auto pull = simulate(sphere, eq, g0, ell);
  const auto anti = sphere_equator(1.0, -M_PI, 0.0, t1);
  const auto push = simulate(sphere, anti, g0, M_PI - ell);
  REQUIRE(push.records.size() == pull.records.size());
  double err = 0.0;
  for (std::size_t i = 0; i < pull.records.size(); ++i)
    err = std::max(err, (push.records[i].gamma - pull.records[i].gamma).norm());
  CHECK(err < 1e-6);
  for (const auto& r : push.records) CHECK(r.sigma == -1);
}

TEST_CASE("tractor_from_tractrix") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  const auto seg = flat_line(0, 3, vec2(1, 1), vec2(0.6, 0.8));
  const auto eta = tractor_from_tractrix(flat, seg, 2.0);
  for (double s : {0.0, 1.0, 2.5}) {
    const Vec expect = vec2(1, 1) + (s + 2.0) * vec2(0.6, 0.8);
    CHECK((eta.at(s).x - expect).norm() < 1e-12);
  }

  // Round trip: the tractrix of the constructed tractor is the original curve.
  FourierCurve wavy;
  wavy.omega = 0.8;
  wavy.coords = {{0.0, 1.0, {}}, {0.3, 0.0, {{1, 0.0, 0.6}}}};
  const auto g = TractorCurve::analytic(wavy, 0, 8);
  for (const char* name : {"flat", "hilly"}) {
    const auto m = std::string(name) == "flat" ? flat : make_catalog_surface("hilly", {});
    const auto tractor = tractor_from_tractrix(m, g, 1.0);
    const auto tr = simulate(m, tractor, g.at(0).x, 1.0);
    double err = 0.0;
    for (const auto& r : tr.records) err = std::max(err, (r.gamma - g.at(r.t).x).norm());
    CHECK(err < 1e-5);
  }
}

TEST_CASE("hilly trace matches the golden file") {
  const auto tr = simulate_scenario(scenario("hilly"));
  const auto rows = read_csv_numbers(std::string(TRACTRIX_TEST_DATA) + "/hilly_golden.csv");
  REQUIRE(rows.size() == tr.records.size());
  double err = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = tr.records[i];
    err = std::max({err, std::abs(rows[i][0] - r.t), std::abs(rows[i][1] - r.s),
                    std::abs(rows[i][2] - r.gamma[0]), std::abs(rows[i][3] - r.gamma[1]),
                    std::abs(rows[i][4] - r.eta[0]), std::abs(rows[i][5] - r.eta[1])});
    if (std::isfinite(rows[i][7])) err = std::max(err, std::abs(rows[i][7] - r.kappa));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("trace invariants on curved models") {
  for (std::string name : {"sphere_quarter", "hyperbolic", "paraboloid", "hilly"}) {
    CAPTURE(name);
    auto cfg = scenario(name.c_str());
    const auto tr = simulate_scenario(cfg);
    const auto& m = tr.model;
    for (std::size_t i = 0; i < tr.records.size(); i += 50) {
      const auto& r = tr.records[i];
      CHECK(std::abs(pole_distance(m, r.gamma, r.eta, tr.ell) - tr.ell) < 1e-6);
    }
    std::size_t compared = 0;
    for (const auto& r : tr.records) {
      if (r.singular || r.kappa_masked || !(r.kappa > 0.05) || !std::isfinite(r.kappa_fd)) continue;
      CHECK(std::abs(r.kappa_fd / r.kappa - 1) < 1e-3);
      ++compared;
    }
    CHECK(compared > 0);
    for (std::size_t i = 1; i < tr.records.size(); ++i)
      CHECK(tr.records[i].s >= tr.records[i - 1].s);
  }
}

TEST_CASE("pole stays tangent to the tractrix") {
  auto cfg = scenario("hilly");
  cfg.tractor.t1 = 2.0;
  cfg.sim.dt = 1e-3;
  const auto tr = simulate_scenario(cfg);
  const auto& m = tr.model;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    const Vec chord = tr.records[i + 1].gamma - tr.records[i - 1].gamma;
    const Vec a = chord / m.norm(r.gamma, chord);
    worst = std::max(worst, m.norm(r.gamma, a - r.pole_dir));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("flat stepping agrees with the shooting path") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  FourierCurve wavy;
  wavy.coords = {{0.0, 1.0, {}}, {0.0, 0.0, {{1, 0.0, 0.5}}}};
  const auto tractor = TractorCurve::analytic(wavy, 0, 6);
  SimParams p;
  const double ell = std::hypot(1.5, 0.2);
  const auto a = simulate(flat, tractor, vec2(-1.5, 0.2), ell, p);
  p.force_shooting = true;
  const auto b = simulate(flat, tractor, vec2(-1.5, 0.2), ell, p);
  double err = 0.0;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    err = std::max(err, (a.records[i].gamma - b.records[i].gamma).norm());
  CHECK(err < 1e-7);
}

TEST_CASE("simulation errors") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  try {
    simulate(flat, flat_line(0, 1), vec2(0, 1.5), 2.0);
    FAIL("expected PoleLengthDrift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleLengthDrift);
  }
  SimParams p;
  p.max_records = 10;
  try {
    simulate(flat, flat_line(0, 1), vec2(0, 2), 2.0, p);
    FAIL("expected RecordOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RecordOverflow);
  }
  const auto sphere = ManifoldModel::space_form(2, 1.0);
  try {
    simulate(sphere, sphere_equator(1.0, 0, 0, 1), vec2(0.0, 0.0), 1.0);
    FAIL("expected a chart error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::SingularChart || e.code() == ErrorCode::ShootingLost ||
           e.code() == ErrorCode::OutOfDomain));
  }
}
