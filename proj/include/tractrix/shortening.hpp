#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "tractrix/manifold.hpp"
#include "tractrix/trace.hpp"

namespace tractrix {

enum class ShorteningMode { SelfRepeated, LoopRepeated };

struct ShorteningIterate {
  std::vector<Vec> curve;  // chart polyline; tractrix samples followed by the spliced pole
  double length = 0.0;
  double residual = 0.0;  // max geodesic curvature
};

struct ShorteningOptions {
  double tol = 1e-6;
  int max_iter = 500;
  SimParams sim;
  // Loop mode: poles longer than this violate the injectivity hypothesis.
  double injectivity = std::numeric_limits<double>::infinity();
  bool keep_curves = true;
};

struct ShorteningRun {
  ShorteningMode mode = ShorteningMode::SelfRepeated;
  Vec P, Q;                      // self-repeated endpoints
  std::vector<Vec> initial;
  double ell = 0.0;
  std::vector<ShorteningIterate> iterates;  // iterate 0 is the initial curve
  std::string stop_reason;                  // "residual", "length" or "max_iter"
  Vec deck;                                 // loop mode: end minus start in the cover
  std::array<double, 2> winding{0.0, 0.0};  // deck / period per identified coordinate
};

double polyline_length(const ManifoldModel& model, const std::vector<Vec>& pts);
// Max geodesic curvature at interior vertices from a covariant second
// difference on the metric chord-length grid. With `deck` set, the polyline
// is a loop from x0 to x0 + deck and the joint vertex is included.
double polyline_geodesic_residual(const ManifoldModel& model, const std::vector<Vec>& pts,
                                  const Vec* deck = nullptr);

// Tractrix in place of the curve, pole spliced at the pulled end, roles
// reversed every round. `initial` runs from P to Q.
ShorteningRun self_repeated(const ManifoldModel& model, const Vec& P, const Vec& Q,
                            const std::vector<Vec>& initial, double ell,
                            const ShorteningOptions& opts = {});

// `loop` is a path in the chart cover from x0 to x0 + deck, where deck is a
// combination of the chart periods (zero on charts without identifications).
ShorteningRun loop_repeated(const ManifoldModel& model, const std::vector<Vec>& loop, double ell,
                            const ShorteningOptions& opts = {});

}  // namespace tractrix
