#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tractrix/kernels.hpp"
#include "tractrix/manifold.hpp"
#include "tractrix/spaceform.hpp"
#include "tractrix/trace.hpp"

namespace tractrix {

struct CurvatureBounds {
  enum class Method { None, Exact, Analytic, Grid };
  double K_lo = 0.0;
  double K_hi = 0.0;
  Method method = Method::None;
  Rect region;  // chart region the bounds were certified on (surfaces)
  double sampled_lo = 0.0;
  double sampled_hi = 0.0;
};

const char* to_string(CurvatureBounds::Method m);

// Bounding box of every pole sample of the trace, i.e. the region swept by
// the wagon pole.
Rect visited_region(const TractrixTrace& trace, double pole_step = 0.0);

struct CertifyOptions {
  double constant_pad = 1e-3;  // half-width around an exact constant K
  double grid_margin = 0.05;   // relative safety margin for grid sampling
  int grid = 200;
  Exec exec = Exec::Parallel;
};

// Strict bounds K_lo < K on region < K_hi. Space forms widen the exact value
// by constant_pad; catalog charts use their analytic range, other charts a
// grid sample widened by grid_margin. User-supplied bounds are accepted only
// when they contain the certified range, otherwise UncertifiedBounds.
CurvatureBounds certify_bounds(const ManifoldModel& model, const Rect& region,
                               const CertifyOptions& opts = {},
                               std::optional<double> user_lo = std::nullopt,
                               std::optional<double> user_hi = std::nullopt);

struct Check {
  enum class Status { Pass, Fail, Skipped };
  std::string name;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // >= 0 when the inequality holds
  Status status = Status::Skipped;
  std::size_t samples = 0;
  std::size_t violations = 0;  // samples with negative margin
  std::string note;
};

const char* to_string(Check::Status s);

struct ComparisonReport {
  std::string scenario;
  std::vector<Check> checks;

  std::size_t failures() const;
  std::size_t passes() const;
  bool ok() const { return failures() == 0; }
  void append(const ComparisonReport& other);
};

constexpr double kPassTolerance = 1e-6;

struct ComparisonOptions {
  double pole_cap = std::numeric_limits<double>::infinity();
};

// Length and area bounds from an upper bound K_hi and a lower bound K_lo of
// the Gauss curvature. All quantities are recomputed from the trace records.
ComparisonReport rauch_length_area_check(const TractrixTrace& trace, const CurvatureBounds& bounds,
                                         const ComparisonOptions& opts = {});

// Jacobi profile of one pole against the comparison profiles:
// j >= J^{K_hi} - 1e-6 and, without conjugate point, j <= J^{K_lo} + 1e-6.
ComparisonReport rauch_jacobi_check(const ManifoldModel& model, const PoleGeodesic& pole,
                                    const CurvatureBounds& bounds);

// Distance and curvature of a geodesic-tractor trace against the space-form
// solutions sharing its d(0): below sol_hi, above sol_lo, for all s > 0.
ComparisonReport toponogov_sandwich_check(const TractrixTrace& trace,
                                          const SpaceFormSolution& sol_hi,
                                          const SpaceFormSolution& sol_lo,
                                          const ComparisonOptions& opts = {});
ComparisonReport toponogov_sandwich_check(const TractrixTrace& trace, const CurvatureBounds& bounds,
                                          const ComparisonOptions& opts = {});

// Leading exponents of d(s) and kappa(s) fitted on the trace against
// Le(K_lo, ell) and Le(K_hi, ell).
ComparisonReport le_sandwich_check(const TractrixTrace& trace, double ell,
                                   const CurvatureBounds& bounds);

}  // namespace tractrix
