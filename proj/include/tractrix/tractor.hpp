#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tractrix/manifold.hpp"

namespace tractrix {

struct CurvePoint {
  Vec x;
  Vec dx;
};

// x(t) = c0 + lin * t + sum_n (a_n cos(n w t) + b_n sin(n w t)), one per coordinate.
struct FourierCoord {
  double c0 = 0.0;
  double lin = 0.0;
  std::vector<std::array<double, 3>> terms;  // (n, a_n, b_n)
  bool operator==(const FourierCoord&) const = default;
};

struct FourierCurve {
  double omega = 1.0;
  std::vector<FourierCoord> coords;

  CurvePoint eval(double t) const;
  bool operator==(const FourierCurve&) const = default;
};

class TractorCurve {
 public:
  enum class Kind { Polyline, ClosedPolyline, Analytic };
  using Evaluator = std::function<CurvePoint(double)>;

  TractorCurve() = default;
  TractorCurve(Kind kind, Evaluator eval, double t0, double t1, bool geodesic = false);

  CurvePoint at(double t) const { return eval_(t); }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  Kind kind() const { return kind_; }
  bool is_geodesic() const { return geodesic_; }
  int dimension() const;

  // Same trace, parameter t -> t0 + t1 - t.
  TractorCurve reversed() const;
  TractorCurve restricted(double t0, double t1) const;

  static TractorCurve analytic(const FourierCurve& curve, double t0, double t1,
                               bool geodesic = false);
  // Cubic Hermite interpolation through samples with known derivatives.
  // Outside the sample range the end cubic is extended.
  static TractorCurve hermite(std::vector<double> t, std::vector<Vec> x, std::vector<Vec> dx,
                              Kind kind = Kind::Polyline, bool geodesic = false);
  // Hermite curve through polyline vertices, parametrized by cumulative metric
  // chord length, with 3-point derivative estimates. A closed polyline repeats
  // its first vertex at the end.
  static TractorCurve polyline(const ManifoldModel& model, const std::vector<Vec>& pts,
                               bool closed = false);
  // Unit-speed geodesic through p with direction v at t = 0, tabulated.
  static TractorCurve geodesic(const ManifoldModel& model, const Vec& p, const Vec& v, double t0,
                               double t1, double step = 0.0);
  // Diameter of the Poincare disk of curvature K at polar angle `angle`,
  // unit speed, through the origin at t = 0.
  static TractorCurve disk_diameter(double K, double angle, double t0, double t1);

 private:
  Kind kind_ = Kind::Analytic;
  Evaluator eval_;
  double t0_ = 0.0;
  double t1_ = 0.0;
  bool geodesic_ = false;
};

// Sphere of curvature K in (colatitude, longitude): the equator traversed
// eastward at unit speed, longitude phi0 at t = 0.
TractorCurve sphere_equator(double K, double phi0, double t0, double t1);
// Latitude circle at colatitude theta, unit speed.
TractorCurve sphere_latitude(double K, double theta, double phi0, double t0, double t1);

}  // namespace tractrix
