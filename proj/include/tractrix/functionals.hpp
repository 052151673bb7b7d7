#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tractrix/trace.hpp"

namespace tractrix {

struct SweepResult {
  double L_gamma = 0.0;
  double L_eta = 0.0;  // length formula: integral of sqrt(1 + kappa^2 J_s(ell)^2) ds
  double K_total = 0.0;
  double area = 0.0;
  double ell = 0.0;
  double gap_bound = 0.0;
  double L_eta_measured = 0.0;  // integral of |eta'| dt
  double L_eta_polyline = 0.0;  // geodesic polyline through the eta samples
  std::vector<double> jacobi_at_ell;
};

// All integrals run over the tractor parameter t: composite Simpson on
// regular stretches, trapezoid on panels where ds/dt changes sign.
double tractrix_length(const TractrixTrace& trace);
double tractor_length(const TractrixTrace& trace);
double tractor_length_measured(const TractrixTrace& trace);
double tractor_polyline_length(const TractrixTrace& trace);
double sweep_area(const TractrixTrace& trace);
// Regular part of the integral of kappa ds plus the pole rotation recorded at
// cusps.
double total_curvature(const TractrixTrace& trace);

// L_gamma (sqrt(1 + m^2) - 1) with m the mean of kappa J_s(ell) over s,
// i.e. sqrt(L^2 + (int kappa J ds)^2) - L; trapezoid on the sample grid.
double length_gap_bound(double L_gamma, std::span<const double> s, std::span<const double> kappa,
                        std::span<const double> jacobi_at_ell);
double length_gap_bound(const TractrixTrace& trace);

struct LeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
  bool low_confidence = false;
};

// Least-squares slope of ln f against s over the last half of the s-range.
LeFit leading_exponent_estimate(std::span<const double> s, std::span<const double> f);

SweepResult compute_sweep(const TractrixTrace& trace);

}  // namespace tractrix
