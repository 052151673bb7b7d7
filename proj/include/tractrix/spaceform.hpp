#pragma once

#include <vector>

#include "tractrix/trace.hpp"
#include "tractrix/types.hpp"

namespace tractrix {

// Geodesic tractor in a space form of curvature K with pole length ell and
// initial distance d0 of the tractrix from the tractor.
struct SpaceFormSolution {
  double K = 0.0;
  double k = 0.0;  // sqrt(|K|)
  double ell = 0.0;
  double d0 = 0.0;
  double C_d = 0.0;
  double C_kappa = 0.0;  // sin of the pole angle at the tractor at s = 0
  double kappa0 = 0.0;   // +inf in the classical limit d0 = ell
  bool long_pole = false;
  bool constant = false;  // k ell = pi/2: d and kappa do not change
};

// Standard mode requires k ell <= pi/2 for K > 0; long-pole mode k ell < pi.
SpaceFormSolution solve_from_d0(double K, double ell, double d0, bool long_pole = false);
double dist_at(const SpaceFormSolution& sol, double s);
double kappa_at(const SpaceFormSolution& sol, double s);
double kappa_from_dist(double K, double ell, double d);
double leading_exponent(double K, double ell);

struct ClassicalPoint {
  Vec point;  // (x, height above the tractor line)
  double s = 0.0;
};

// Classical flat tractrix with the tractor on the x-axis, cusp at t = 0.
ClassicalPoint classical_tractrix(double ell, double t);
double classical_t_of_s(double ell, double s);

// Unit-sphere long pole: triangle A (tractrix), B (tractor), C (foot on the
// equator) in (colatitude, longitude), plus the tractor longitude t(s).
struct LongPoleSample {
  double s = 0.0;
  double t = 0.0;
  double d = 0.0;
  double a = 0.0;
  Vec A, B, C;
};

std::vector<LongPoleSample> long_pole_vertices(double ell, double d0, double s_max, int samples);
// Trace built from the vertices: gamma = A, eta = B, record t is the
// tractor longitude.
TractrixTrace long_pole_sphere(double ell, double d0, double s_max, int samples = 1001);

}  // namespace tractrix
