#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tractrix/types.hpp"

namespace tractrix {

struct Rect {
  double u_min = 0.0;
  double u_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;

  bool contains(double u, double v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
  bool operator==(const Rect&) const = default;
};

// Immersion value and first/second partial derivatives at (u, v).
struct ChartJet {
  Eigen::Vector3d F, Fu, Fv, Fuu, Fuv, Fvv;
};

class SurfaceChart {
 public:
  virtual ~SurfaceChart() = default;
  virtual std::string name() const = 0;
  virtual ChartJet jet(double u, double v) const = 0;
  // Exact range [lo, hi] of the Gauss curvature over a parameter rectangle,
  // when the chart knows it in closed form.
  virtual std::optional<std::pair<double, double>> curvature_range(const Rect&) const {
    return std::nullopt;
  }
};

enum class ModelKind { SpaceForm, EmbeddedSurface };

// gamma[k](i, j) is the symbol with upper index k.
using Christoffel = std::array<Mat, 3>;

class ManifoldModel {
 public:
  // K > 0: (colatitude, longitude) on the sphere of radius 1/sqrt(K).
  // K < 0: Poincare disk of curvature K.  K = 0: Cartesian, dimension 2 or 3.
  static ManifoldModel space_form(int dimension, double K);
  // period[i] > 0 marks coordinate i as identified modulo period[i]; the model
  // then works in the universal cover and ignores the domain bounds in i.
  static ManifoldModel surface(std::shared_ptr<const SurfaceChart> chart, Rect domain,
                               std::array<double, 2> period = {0.0, 0.0});

  ModelKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  double curvature_K() const { return K_; }
  const SurfaceChart* chart() const { return chart_.get(); }
  std::shared_ptr<const SurfaceChart> chart_ptr() const { return chart_; }
  const Rect& domain() const { return domain_; }
  const std::array<double, 2>& period() const { return period_; }
  bool is_flat_space() const { return kind_ == ModelKind::SpaceForm && K_ == 0.0; }

  bool in_domain(const Vec& p) const;
  Mat metric_at(const Vec& p) const;
  Christoffel christoffel_at(const Vec& p) const;
  double gauss_curvature_at(const Vec& p) const;
  // Contraction Gamma^k_ij a^i b^j.
  Vec christoffel_contract(const Vec& p, const Vec& a, const Vec& b) const;
  // Geodesic acceleration -Gamma(xd, xd); also the Gauss curvature at x when
  // gauss is non-null (one chart evaluation for both).
  Vec geodesic_accel(const Vec& x, const Vec& xd, double* gauss = nullptr) const;
  double inner(const Vec& p, const Vec& a, const Vec& b) const;
  double norm(const Vec& p, const Vec& a) const;
  Eigen::Vector3d embed(const Vec& p) const;
  std::string describe() const;

 private:
  void require(const Vec& p) const;

  ModelKind kind_ = ModelKind::SpaceForm;
  int dim_ = 2;
  double K_ = 0.0;
  std::shared_ptr<const SurfaceChart> chart_;
  Rect domain_;
  std::array<double, 2> period_{0.0, 0.0};
};

struct PoleSample {
  double u = 0.0;
  Vec x;
  Vec tangent;
  double jacobi = 0.0;
};

struct PoleGeodesic {
  Vec base;
  Vec direction;
  double length = 0.0;
  double step = 0.0;
  bool has_jacobi = false;
  std::vector<PoleSample> samples;

  const Vec& endpoint() const { return samples.back().x; }
  const Vec& end_tangent() const { return samples.back().tangent; }
};

struct ExpOptions {
  bool long_pole = false;
  bool jacobi = true;
};

// Number of fixed RK4 steps used for a geodesic of this length: at least 2,
// always even so Simpson's rule applies to the samples.
int pole_steps(double length, double step);

PoleGeodesic exp_map(const ManifoldModel& model, const Vec& p, const Vec& v, double length,
                     double step = 0.0, ExpOptions opts = {});

struct GeodesicEnd {
  Vec x;
  Vec xdot;
};

// Geodesic with initial velocity w over unit parameter time, fixed step count.
GeodesicEnd geodesic_endpoint(const ManifoldModel& model, const Vec& p, const Vec& w, int steps);

struct ShootOptions {
  double tol = 1e-11;
  int max_iter = 50;
  double fd_step = 1e-6;
  int steps = 200;
  const Mat* jacobian = nullptr;  // warm Jacobian of the endpoint map
};

struct ShootResult {
  Vec direction;    // unit tangent at p
  double length = 0.0;
  Vec velocity;     // length * direction
  Vec end_tangent;  // unit tangent at q
  Mat jacobian;
  int iterations = 0;
  double residual = 0.0;
};

// Finds the geodesic from p to q near the initial guess; v_guess fixes the
// direction and `length` its initial magnitude. The returned length is the
// one actually realized.
ShootResult geodesic_shoot(const ManifoldModel& model, const Vec& p, const Vec& q, double length,
                           const Vec& v_guess, const ShootOptions& opts = {});

// Transports w0 along the chart-linear interpolation of the samples.
Vec parallel_transport(const ManifoldModel& model, std::span<const Vec> curve, const Vec& w0,
                       int substeps = 1);

struct JacobiProfile {
  std::vector<double> u;
  std::vector<double> j;
  bool conjugate_point = false;
};

JacobiProfile jacobi_scalar(const ManifoldModel& model, const PoleGeodesic& pole);

// J^K(u): sin(ku)/k, u, sinh(ku)/k.
double jacobi_closed_form(double K, double u);
// Integral of J^K over [0, ell]: (1 - cos(k ell))/k^2, ell^2/2, (cosh(k ell) - 1)/k^2.
double jacobi_closed_form_integral(double K, double ell);

// Composite Simpson on equally spaced samples (3/8 rule closes an odd panel count).
double simpson(std::span<const double> f, double h);

}  // namespace tractrix
