#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "tractrix/charts.hpp"
#include "tractrix/error.hpp"
#include "tractrix/scenario.hpp"
#include "tractrix/shortening.hpp"

using namespace tractrix;

namespace {

ScenarioConfig scenario(const std::string& name) {
  return load_config(std::string(TRACTRIX_SCENARIOS) + "/" + name + ".json");
}

void check_monotone(const ShorteningRun& run) {
  for (std::size_t i = 1; i < run.iterates.size(); ++i)
    CHECK(run.iterates[i].length <= run.iterates[i - 1].length + 1e-9);
}

void check_endpoints(const ShorteningRun& run) {
  for (const auto& it : run.iterates) {
    if (it.curve.empty()) continue;
    CHECK((it.curve.front() - run.P).norm() == 0.0);
    CHECK((it.curve.back() - run.Q).norm() == 0.0);
  }
}

void check_closed(const ShorteningRun& run) {
  for (const auto& it : run.iterates) {
    if (it.curve.empty()) continue;
    CHECK((it.curve.back() - it.curve.front() - run.deck).norm() < 1e-12);
  }
}

}  // namespace

TEST_CASE("polyline length and residual") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  std::vector<Vec> line, circ;
  for (int i = 0; i <= 100; ++i) {
    line.push_back(vec2(0.03 * i, 0.04 * i));
    const double a = 2 * M_PI * i / 100;
    circ.push_back(vec2(2 * std::cos(a), 2 * std::sin(a)));
  }
  CHECK(polyline_length(flat, line) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(polyline_geodesic_residual(flat, line) < 1e-12);
  CHECK(polyline_length(flat, circ) == doctest::Approx(4 * M_PI).epsilon(1e-3));
  CHECK(polyline_geodesic_residual(flat, circ) == doctest::Approx(0.5).epsilon(1e-3));

  // Great circle on the sphere: zero geodesic curvature in a curved chart.
  const auto sphere = ManifoldModel::space_form(2, 1.0);
  std::vector<Vec> eq;
  for (int i = 0; i <= 100; ++i) eq.push_back(vec2(M_PI / 2, 0.02 * i));
  CHECK(polyline_geodesic_residual(sphere, eq) < 1e-6);
  CHECK(polyline_length(sphere, eq) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("flat chord") {
  const auto run = shorten_scenario(scenario("shorten_flat"));
  CHECK(run.mode == ShorteningMode::SelfRepeated);
  CHECK(std::abs(run.iterates.back().length - 10.0) < 1e-4);
  CHECK(run.iterates.size() <= 51);
  CHECK(run.iterates.front().length > 10.5);
  check_monotone(run);
  check_endpoints(run);
}

TEST_CASE("great-circle arc on the sphere") {
  const auto run = shorten_scenario(scenario("shorten_sphere"));
  CHECK(std::abs(run.iterates.back().length - M_PI / 2) < 1e-3);
  check_monotone(run);
  check_endpoints(run);
}

TEST_CASE("hilly surface between two basins") {
  const auto run = shorten_scenario(scenario("shorten_hilly"));
  CHECK(run.iterates.back().residual < 1e-3);
  CHECK(run.iterates.back().length <= run.iterates.front().length);
  check_monotone(run);
  check_endpoints(run);
}

TEST_CASE("flat torus: closed geodesic of length one period") {
  const auto run = shorten_scenario(scenario("shorten_torus"));
  CHECK(run.mode == ShorteningMode::LoopRepeated);
  CHECK(std::abs(run.iterates.back().length - 1.0) < 1e-3);
  CHECK(run.winding[0] == doctest::Approx(1.0));
  CHECK(run.winding[1] == doctest::Approx(0.0));
  check_monotone(run);
  check_closed(run);
}

TEST_CASE("cylinder: horizontal circle") {
  const auto run = shorten_scenario(scenario("shorten_cylinder"));
  CHECK(std::abs(run.iterates.back().length - 2 * M_PI) < 1e-3);
  CHECK(run.winding[0] == doctest::Approx(1.0));
  // The final loop lies at one height.
  double vmin = 1e9, vmax = -1e9;
  for (const auto& p : run.iterates.back().curve) {
    vmin = std::min(vmin, p[1]);
    vmax = std::max(vmax, p[1]);
  }
  CHECK(vmax - vmin < 0.05);
  check_monotone(run);
  check_closed(run);
}

TEST_CASE("already geodesic loop stops after the residual check") {
  const auto torus = make_catalog_surface("flat_torus", {{"Lx", 1.0}, {"Ly", 1.0}});
  std::vector<Vec> loop;
  for (int i = 0; i <= 100; ++i) loop.push_back(vec2(0.01 * i, 0.5));
  ShorteningOptions o;
  o.tol = 1e-6;
  const auto run = loop_repeated(torus, loop, 0.2, o);
  CHECK(run.iterates.size() == 1);
  CHECK(run.stop_reason == "residual");
  CHECK(run.iterates.back().length == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pole longer than the endpoint distance") {
  const auto flat = ManifoldModel::space_form(2, 0.0);
  std::vector<Vec> c;
  for (int i = 0; i <= 20; ++i) c.push_back(vec2(0.05 * i, 0.1 * std::sin(M_PI * i / 20.0)));
  try {
    self_repeated(flat, c.front(), c.back(), c, 2.0);
    FAIL("expected PoleTooLong");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleTooLong);
  }
}

TEST_CASE("loop pole beyond the injectivity bound") {
  const auto torus = make_catalog_surface("flat_torus", {{"Lx", 1.0}, {"Ly", 1.0}});
  std::vector<Vec> loop;
  for (int i = 0; i <= 100; ++i) loop.push_back(vec2(0.01 * i, 0.5 + 0.05 * std::sin(0.02 * M_PI * i)));
  ShorteningOptions o;
  o.injectivity = 0.5;
  CHECK_THROWS_AS(loop_repeated(torus, loop, 0.6, o), Error);
}
