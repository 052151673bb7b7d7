#pragma once

#include <optional>
#include <span>

#include "tractrix/manifold.hpp"
#include "tractrix/trace.hpp"
#include "tractrix/tractor.hpp"

namespace tractrix {

// Velocity of the flat tractrix: the component of eta' along the pole.
Vec euclidean_rhs(const Vec& eta, const Vec& eta_prime, const Vec& gamma, double ell);

// Pulled (or, where the tractor moves towards the tractrix, pushed) tractrix
// driven by the tractor over its parameter range.
TractrixTrace simulate(const ManifoldModel& model, const TractorCurve& tractor, const Vec& gamma0,
                       double ell, const SimParams& params = {});

// Runs the tractor backwards: the tractrix attached at eta(t1) is pushed.
// Records use the parameter of the reversed tractor.
TractrixTrace pushed_simulate(const ManifoldModel& model, const TractorCurve& tractor,
                              const Vec& gamma0, double ell, const SimParams& params = {});

// Cusp test on three consecutive records: a stationary middle record or a
// sign change of ds/dt between the outer ones.
std::optional<CuspRecord> detect_cusp(std::span<const TraceRecord> window, double eps);

// Fills sigma and the cusp list of an annotated trace.
void mark_cusps(TractrixTrace& trace, double eps);

// eta(s) = exp(gamma(s), sign * unit(gamma'(s)), ell); derivative by central
// differences of the endpoint map.
TractorCurve tractor_from_tractrix(const ManifoldModel& model, const TractorCurve& gamma,
                                   double ell, int sign = 1, double pole_step = 0.0);

// Point at distance d0 from a geodesic tractor (foot behind eta(t0), on the
// left for side = +1) whose pole to eta(t0) has length ell.
Vec place_at_offset(const ManifoldModel& model, const TractorCurve& tractor, double ell, double d0,
                    int side = 1);

// Point reached by going back from eta(t0) along its tangent geodesic by ell.
Vec place_behind(const ManifoldModel& model, const TractorCurve& tractor, double ell);

// Foot of the geodesic perpendicular from gamma to a geodesic tractor:
// parameter tau of the foot and the distance d >= 0.
struct Foot {
  double tau = 0.0;
  double d = 0.0;
};
Foot project_to_geodesic(const ManifoldModel& model, const TractorCurve& tractor, const Vec& gamma,
                         double t_guess, int steps);

// Left unit normal (metric) to the tangent a at x, 2D only.
Vec unit_normal(const ManifoldModel& model, const Vec& x, const Vec& a, int side = 1);

// Geodesic distance along the pole realized by shooting from p to q.
double pole_distance(const ManifoldModel& model, const Vec& p, const Vec& q, double guess_length,
                     double pole_step = 0.0);

}  // namespace tractrix
