#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "tractrix/manifold.hpp"

namespace tractrix {

struct SimParams {
  double dt = 0.01;              // tractor parameter step
  double pole_step = 0.0;        // geodesic sample step; 0 means ell / 200
  double cusp_speed_eps = 1e-9;  // |ds/dt| below eps * |eta'| counts as stationary
  std::size_t max_records = 5'000'000;
  bool force_shooting = false;  // use the general path on flat models too
  bool parallel = true;         // annotate records with the OpenMP kernel
  bool operator==(const SimParams&) const = default;
};

struct TraceRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  double t = 0.0;
  double s = 0.0;
  Vec gamma;
  Vec eta;
  Vec eta_prime;
  Vec pole_dir;          // unit tangent of the pole at gamma, pointing to eta
  Vec pole_end_tangent;  // T(ell), unit tangent at eta
  double pole_length = 0.0;

  double speed = 0.0;      // ds/dt = <eta', T(ell)>, signed
  double eta_speed = 0.0;  // |eta'|
  double omega = 0.0;      // pole rotation rate |eta'_perp| / J_s(ell)
  double jacobi_ell = nan;
  double jacobi_int = nan;  // integral of J_s over [0, ell]
  double kappa = nan;       // +inf at stationary records
  double kappa_fd = nan;    // covariant finite-difference estimate
  double d = nan;           // distance to the geodesic tractor
  bool has_d = false;
  bool kappa_masked = false;
  bool singular = false;
  bool conjugate_point = false;
  int sigma = 1;  // +1 pull, -1 push
};

struct CuspRecord {
  double t = 0.0;
  double s = 0.0;
  double turning_angle = 0.0;  // pi for a tangent reversal plus pole rotation
  double pole_rotation = 0.0;  // pole rotation inside the stationary run
  std::size_t first = 0;       // record range [first, last] of the event
  std::size_t last = 0;
};

struct TractrixTrace {
  std::vector<TraceRecord> records;
  std::vector<CuspRecord> cusps;
  double ell = 0.0;
  double dt = 0.0;
  bool geodesic_tractor = false;
  ManifoldModel model;
};

}  // namespace tractrix
