#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tractrix/error.hpp"
#include "tractrix/kernels.hpp"
#include "tractrix/manifold.hpp"
#include "tractrix/spaceform.hpp"

using namespace tractrix;

namespace {

Eigen::Vector3d unit_sphere(const Vec& p) {
  return {std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]), std::cos(p[0])};
}

double arc(const Vec& a, const Vec& b) {
  return std::acos(std::clamp(unit_sphere(a).dot(unit_sphere(b)), -1.0, 1.0));
}

// Right triangle with hypotenuse ell and leg d opposite the angle B at the
// tractor: sin B from the sine rule of the model, kappa = tan B / J(ell).
double kappa_oracle(double K, double ell, double d) {
  const double k = std::sqrt(std::abs(K));
  double sinB;
  if (K > 0)
    sinB = std::sin(k * d) / std::sin(k * ell);
  else if (K < 0)
    sinB = std::sinh(k * d) / std::sinh(k * ell);
  else
    sinB = d / ell;
  return sinB / std::sqrt(1 - sinB * sinB) / jacobi_closed_form(K, ell);
}

// d'(s) from the first variation: -tan(kd) cot(k ell), -d / ell, -tanh(kd) coth(k ell).
double dist_slope_oracle(double K, double ell, double d) {
  const double k = std::sqrt(std::abs(K));
  if (K > 0) return -std::tan(k * d) / std::tan(k * ell);
  if (K < 0) return -std::tanh(k * d) / std::tanh(k * ell);
  return -d / ell;
}

void expect_domain_violation(auto&& f) {
  try {
    f();
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainViolation);
  }
}

}  // namespace

TEST_CASE("flat closed forms") {
  const auto sol = solve_from_d0(0.0, 2.0, 2.0);
  CHECK(std::isinf(sol.kappa0));
  CHECK(dist_at(sol, 2.0) == doctest::Approx(2.0 / M_E).epsilon(1e-14));
  for (double s : {0.1, 1.0, 5.0}) {
    CHECK(dist_at(sol, s) == doctest::Approx(2 * std::exp(-s / 2)).epsilon(1e-14));
    const double k = std::exp(-s / 2) / (2 * std::sqrt(1 - std::exp(-s)));
    CHECK(kappa_at(sol, s) == doctest::Approx(k).epsilon(1e-12));
  }
  CHECK(kappa_from_dist(0.0, 3.0, 3.0 / std::sqrt(2.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(kappa_from_dist(0.0, 1.0, 1.0 - 1e-12) > 1e5);
}

TEST_CASE("sphere with ell = pi/2 keeps d and kappa constant") {
  for (double d0 : {0.2, M_PI / 4, 1.2}) {
    const auto sol = solve_from_d0(1.0, M_PI / 2, d0);
    CHECK(sol.constant);
    for (double s : {0.0, 1.0, 10.0}) {
      CHECK(dist_at(sol, s) == doctest::Approx(d0).epsilon(1e-14));
      CHECK(kappa_at(sol, s) == doctest::Approx(kappa_at(sol, 0.0)).epsilon(1e-14));
    }
  }
  CHECK(leading_exponent(1.0, M_PI / 2) == doctest::Approx(0.0));
}

TEST_CASE("distance solves its first-order equation") {
  const double h = 1e-4;
  for (double K : {-1.0, -0.3, 0.0, 0.5, 1.0})
    for (double ell : {0.6, 1.2}) {
      const auto sol = solve_from_d0(K, ell, 0.7 * ell);
      for (double s : {0.2, 1.0, 3.0}) {
        const double fd = (dist_at(sol, s + h) - dist_at(sol, s - h)) / (2 * h);
        CHECK(fd == doctest::Approx(dist_slope_oracle(K, ell, dist_at(sol, s))).epsilon(1e-7));
      }
    }
}

TEST_CASE("curvature against the right-triangle relation") {
  for (double K : {-1.0, -0.25, 0.0, 0.5, 1.0})
    for (double ell : {0.5, 1.0, 1.5})
      for (double q : {0.1, 0.5, 0.9}) {
        const double d = q * ell;
        CHECK(kappa_from_dist(K, ell, d) ==
              doctest::Approx(kappa_oracle(K, ell, d)).epsilon(1e-12));
      }
}

TEST_CASE("kappa_at agrees with kappa_from_dist along the solution") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double K = -1.0 + 2.0 * U(rng);
    const double kmax = K > 0 ? M_PI / 2 / std::sqrt(K) : 3.0;
    const double ell = (0.1 + 0.85 * U(rng)) * std::min(kmax, 3.0);
    const double d0 = (0.05 + 0.9 * U(rng)) * ell;
    const double s = 5.0 * U(rng);
    const auto sol = solve_from_d0(K, ell, d0);
    CHECK(kappa_at(sol, s) ==
          doctest::Approx(kappa_from_dist(K, ell, dist_at(sol, s))).epsilon(1e-10));
  }
}

TEST_CASE("small curvature approaches the flat formulas") {
  const double ell = 1.3, d0 = 0.9;
  const auto flat = solve_from_d0(0.0, ell, d0);
  for (double K : {1e-8, -1e-8}) {
    const auto sol = solve_from_d0(K, ell, d0);
    for (double s : {0.5, 2.0, 6.0}) {
      CHECK(std::abs(dist_at(sol, s) - dist_at(flat, s)) < 1e-6);
      CHECK(std::abs(kappa_at(sol, s) - kappa_at(flat, s)) < 1e-6);
    }
    CHECK(std::abs(leading_exponent(K, ell) + 1 / ell) < 1e-6);
  }
  for (double K : {1e-6, -1e-6}) {
    const double diff = kappa_from_dist(K, ell, d0) - kappa_from_dist(0.0, ell, d0);
    CHECK(std::abs(diff) < 10 * std::abs(K));
  }
}

TEST_CASE("leading exponents") {
  CHECK(leading_exponent(0.0, 2.0) == -0.5);
  CHECK(leading_exponent(-1.0, 1.0) == doctest::Approx(-1 / std::tanh(1.0)).epsilon(1e-14));
  CHECK(leading_exponent(-1.0, 1.0) == doctest::Approx(-1.31304).epsilon(1e-5));
  CHECK(leading_exponent(0.5, 1.0) ==
        doctest::Approx(-std::sqrt(0.5) / std::tan(std::sqrt(0.5))).epsilon(1e-14));
  const std::vector<double> Ks{-2.0, -1.0, -0.5, 0.0, 0.3, 0.9, 2.0};
  for (double ell : {0.5, 1.0})
    for (std::size_t i = 1; i < Ks.size(); ++i)
      CHECK(leading_exponent(Ks[i - 1], ell) < leading_exponent(Ks[i], ell));
}

TEST_CASE("distance and curvature increase with K") {
  const std::vector<double> Ks{-1.0, -0.5, 0.0, 0.5, 0.9};
  std::vector<SpaceFormSolution> sols;
  for (double K : Ks) sols.push_back(solve_from_d0(K, M_PI / 2, M_PI / 4));
  std::size_t violations = 0;
  for (int i = 1; i <= 600; ++i) {
    const double s = 0.01 * i;
    for (std::size_t k = 1; k < sols.size(); ++k) {
      if (!(dist_at(sols[k - 1], s) < dist_at(sols[k], s))) ++violations;
      if (!(kappa_at(sols[k - 1], s) < kappa_at(sols[k], s))) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("classical tractrix closed form") {
  const auto p0 = classical_tractrix(2.0, 0.0);
  CHECK((p0.point - vec2(0, 2)).norm() == 0.0);
  CHECK(p0.s == 0.0);
  const auto p = classical_tractrix(2.0, 10.0);
  CHECK(p.point[0] == doctest::Approx(10 - 2 * std::tanh(5.0)).epsilon(1e-15));
  CHECK(p.point[1] == doctest::Approx(2 / std::cosh(5.0)).epsilon(1e-12));
  CHECK(p.point[0] == doctest::Approx(8.00018).epsilon(1e-6));
  CHECK(p.point[1] == doctest::Approx(0.026954).epsilon(1e-4));
  double worst = 0.0;
  for (int i = -100; i <= 100; ++i) {
    const double t = 0.1 * i;
    worst = std::max(worst, std::abs(classical_t_of_s(2.0, classical_tractrix(2.0, t).s) - t));
  }
  CHECK(worst < 1e-12);
  CHECK(classical_tractrix(2.0, -3.0).s < 0.0);
}

TEST_CASE("long-pole sphere triangles") {
  const double ell = 3 * M_PI / 4, d0 = 3 * M_PI / 80;
  const auto v = long_pole_vertices(ell, d0, 1.7, 401);
  const auto sol = solve_from_d0(1.0, ell, d0, true);
  for (const auto& p : v) {
    CHECK(std::abs(std::cos(ell) - std::cos(p.d) * std::cos(p.a)) < 1e-10);
    CHECK(std::abs(arc(p.A, p.B) - ell) < 1e-10);
    CHECK(std::abs(arc(p.A, p.C) - p.d) < 1e-10);
    CHECK(std::abs(arc(p.B, p.C) - p.a) < 1e-10);
    CHECK(std::abs(p.C[0] - M_PI / 2) < 1e-12);
    CHECK(p.d == doctest::Approx(dist_at(sol, p.s)).epsilon(1e-12));
  }
  // Tractor longitude t(s): increasing.
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i].t > v[i - 1].t);

  const auto tr = long_pole_sphere(ell, d0, 1.7, 401);
  CHECK(tr.records.size() == 401);
  CHECK(tr.ell == ell);

  // Just above pi/2 the distance barely changes.
  const auto w = long_pole_vertices(M_PI / 2 + 1e-6, 0.3, 5.0, 11);
  for (const auto& p : w) CHECK(std::abs(p.d - 0.3) < 1e-5);
}

TEST_CASE("spaceform table: serial and parallel agree") {
  const auto sol = solve_from_d0(-1.0, 1.0, 0.5);
  std::vector<double> s;
  for (int i = 0; i < 1000; ++i) s.push_back(0.01 * i);
  const auto a = spaceform_table(sol, s, Exec::Serial);
  const auto b = spaceform_table(sol, s, Exec::Parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].d == b[i].d);
    CHECK(a[i].kappa == b[i].kappa);
    CHECK(a[i].d == dist_at(sol, s[i]));
  }
}

TEST_CASE("domain violations") {
  expect_domain_violation([] { solve_from_d0(0.0, 1.0, 1.5); });
  expect_domain_violation([] { solve_from_d0(0.0, 1.0, 0.0); });
  expect_domain_violation([] { solve_from_d0(1.0, 2.0, 0.5); });
  expect_domain_violation([] { solve_from_d0(1.0, 3.5, 0.5, true); });
  expect_domain_violation([] { kappa_from_dist(0.0, 1.0, 1.2); });
  expect_domain_violation([] { leading_exponent(1.0, 3.5); });
  expect_domain_violation([] { long_pole_vertices(1.0, 0.5, 1.0, 10); });
  expect_domain_violation([] { long_pole_vertices(3 * M_PI / 4, 3 * M_PI / 80, 2.0, 10); });
  CHECK_NOTHROW(solve_from_d0(1.0, 2.0, 0.5, true));
}
