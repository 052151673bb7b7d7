#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tractrix/manifold.hpp"
#include "tractrix/spaceform.hpp"
#include "tractrix/trace.hpp"
#include "tractrix/tractor.hpp"

namespace tractrix {

// Record-level work that is independent across records. Each kernel has an
// OpenMP version and a serial reference; both produce identical results.
enum class Exec { Serial, Parallel };

// Fills the per-record pole quantities of a stepped trace: Jacobi profile
// J_s(ell) and its integral, T(ell), ds/dt, pole rotation rate, curvature,
// the covariant finite-difference curvature and, for geodesic tractors, d.
void annotate_records(const TractorCurve& tractor, TractrixTrace& trace, double pole_step,
                      double cusp_eps, Exec exec);
void annotate_records_serial(const TractorCurve& tractor, TractrixTrace& trace, double pole_step,
                             double cusp_eps);
void annotate_records_parallel(const TractorCurve& tractor, TractrixTrace& trace,
                               double pole_step, double cusp_eps);

// Min and max Gauss curvature on an n x n grid over the rectangle.
std::pair<double, double> sample_curvature_range(const ManifoldModel& model, const Rect& r, int n,
                                                 Exec exec);

struct SpaceFormRow {
  double s = 0.0;
  double d = 0.0;
  double kappa = 0.0;
};

std::vector<SpaceFormRow> spaceform_table(const SpaceFormSolution& sol, std::span<const double> s,
                                          Exec exec);

}  // namespace tractrix
