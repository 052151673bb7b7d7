#include "tractrix/manifold.hpp"

#include <cmath>
#include <sstream>

#include "tractrix/error.hpp"

namespace tractrix {

namespace {

constexpr double kSingularDet = 1e-12;

struct SurfaceFrame {
  ChartJet jet;
  double E, F, G, det;
};

SurfaceFrame surface_frame(const SurfaceChart& chart, const Vec& p) {
  SurfaceFrame s{chart.jet(p[0], p[1]), 0, 0, 0, 0};
  s.E = s.jet.Fu.dot(s.jet.Fu);
  s.F = s.jet.Fu.dot(s.jet.Fv);
  s.G = s.jet.Fv.dot(s.jet.Fv);
  s.det = s.E * s.G - s.F * s.F;
  if (!(s.det >= kSingularDet))
    throw Error(ErrorCode::SingularChart, "metric determinant below 1e-12 on " + chart.name());
  return s;
}

double surface_gauss(const SurfaceFrame& s) {
  const Eigen::Vector3d n = s.jet.Fu.cross(s.jet.Fv).normalized();
  const double L = s.jet.Fuu.dot(n);
  const double M = s.jet.Fuv.dot(n);
  const double N = s.jet.Fvv.dot(n);
  return (L * N - M * M) / s.det;
}

Vec surface_contract(const SurfaceFrame& s, const Vec& a, const Vec& b) {
  const Eigen::Vector3d A = s.jet.Fuu * (a[0] * b[0]) + s.jet.Fuv * (a[0] * b[1] + a[1] * b[0]) +
                            s.jet.Fvv * (a[1] * b[1]);
  const double r0 = A.dot(s.jet.Fu);
  const double r1 = A.dot(s.jet.Fv);
  return vec2((s.G * r0 - s.F * r1) / s.det, (-s.F * r0 + s.E * r1) / s.det);
}

}  // namespace

ManifoldModel ManifoldModel::space_form(int dimension, double K) {
  if (dimension != 2 && dimension != 3)
    throw Error(ErrorCode::InvalidArgument, "space form dimension must be 2 or 3");
  if (dimension == 3 && K != 0.0)
    throw Error(ErrorCode::InvalidArgument, "curved space forms are provided in dimension 2 only");
  if (!std::isfinite(K)) throw Error(ErrorCode::InvalidArgument, "curvature must be finite");
  ManifoldModel m;
  m.kind_ = ModelKind::SpaceForm;
  m.dim_ = dimension;
  m.K_ = K;
  return m;
}

ManifoldModel ManifoldModel::surface(std::shared_ptr<const SurfaceChart> chart, Rect domain,
                                     std::array<double, 2> period) {
  if (!chart) throw Error(ErrorCode::InvalidArgument, "missing chart");
  if (!(domain.u_min < domain.u_max) || !(domain.v_min < domain.v_max))
    throw Error(ErrorCode::InvalidArgument, "empty chart domain");
  ManifoldModel m;
  m.kind_ = ModelKind::EmbeddedSurface;
  m.dim_ = 2;
  m.chart_ = std::move(chart);
  m.domain_ = domain;
  m.period_ = period;
  return m;
}

bool ManifoldModel::in_domain(const Vec& p) const {
  if (p.size() != dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(p[i])) return false;
  if (kind_ == ModelKind::SpaceForm) {
    if (K_ < 0.0) return p.squaredNorm() < 1.0;
    return true;
  }
  const bool u_ok = period_[0] > 0.0 || (p[0] >= domain_.u_min && p[0] <= domain_.u_max);
  const bool v_ok = period_[1] > 0.0 || (p[1] >= domain_.v_min && p[1] <= domain_.v_max);
  return u_ok && v_ok;
}

void ManifoldModel::require(const Vec& p) const {
  if (p.size() != dim_) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  if (!in_domain(p)) throw Error(ErrorCode::OutOfDomain, "point outside chart domain");
}

Mat ManifoldModel::metric_at(const Vec& p) const {
  require(p);
  Mat g = Mat::Identity(dim_, dim_);
  if (kind_ == ModelKind::SpaceForm) {
    if (K_ > 0.0) {
      const double R2 = 1.0 / K_;
      const double s = std::sin(p[0]);
      g(0, 0) = R2;
      g(1, 1) = R2 * s * s;
      if (g(0, 0) * g(1, 1) < kSingularDet)
        throw Error(ErrorCode::SingularChart, "sphere chart at a pole");
    } else if (K_ < 0.0) {
      const double k = std::sqrt(-K_);
      const double lam = 2.0 / (k * (1.0 - p.squaredNorm()));
      g *= lam * lam;
    }
    return g;
  }
  const SurfaceFrame s = surface_frame(*chart_, p);
  g(0, 0) = s.E;
  g(0, 1) = g(1, 0) = s.F;
  g(1, 1) = s.G;
  return g;
}

Christoffel ManifoldModel::christoffel_at(const Vec& p) const {
  require(p);
  Christoffel gam;
  for (int k = 0; k < 3; ++k) gam[k] = Mat::Zero(dim_, dim_);
  // Bilinear in (a, b): evaluate on basis pairs.
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      const Vec c = christoffel_contract(p, Vec::Unit(dim_, i), Vec::Unit(dim_, j));
      for (int k = 0; k < dim_; ++k) gam[k](i, j) = c[k];
    }
  return gam;
}

double ManifoldModel::gauss_curvature_at(const Vec& p) const {
  require(p);
  if (kind_ == ModelKind::SpaceForm) return K_;
  return surface_gauss(surface_frame(*chart_, p));
}

Vec ManifoldModel::christoffel_contract(const Vec& p, const Vec& a, const Vec& b) const {
  if (kind_ == ModelKind::SpaceForm) {
    if (K_ == 0.0) return Vec::Zero(dim_);
    if (K_ > 0.0) {
      const double s = std::sin(p[0]);
      const double c = std::cos(p[0]);
      if (s * s < kSingularDet * K_ * K_)
        throw Error(ErrorCode::SingularChart, "sphere chart at a pole");
      return vec2(-s * c * a[1] * b[1], c / s * (a[0] * b[1] + a[1] * b[0]));
    }
    const double r2 = p.squaredNorm();
    if (!(r2 < 1.0)) throw Error(ErrorCode::OutOfDomain, "outside the Poincare disk");
    const Vec dphi = p * (2.0 / (1.0 - r2));
    return a * dphi.dot(b) + b * dphi.dot(a) - dphi * a.dot(b);
  }
  return surface_contract(surface_frame(*chart_, p), a, b);
}

Vec ManifoldModel::geodesic_accel(const Vec& x, const Vec& xd, double* gauss) const {
  if (kind_ == ModelKind::EmbeddedSurface) {
    const SurfaceFrame s = surface_frame(*chart_, x);
    if (gauss) *gauss = surface_gauss(s);
    return -surface_contract(s, xd, xd);
  }
  if (gauss) *gauss = K_;
  return -christoffel_contract(x, xd, xd);
}

double ManifoldModel::inner(const Vec& p, const Vec& a, const Vec& b) const {
  if (is_flat_space()) return a.dot(b);
  return a.dot(metric_at(p) * b);
}

double ManifoldModel::norm(const Vec& p, const Vec& a) const {
  return std::sqrt(std::max(0.0, inner(p, a, a)));
}

Eigen::Vector3d ManifoldModel::embed(const Vec& p) const {
  if (kind_ == ModelKind::EmbeddedSurface) return chart_->jet(p[0], p[1]).F;
  if (K_ > 0.0) {
    const double R = 1.0 / std::sqrt(K_);
    return {R * std::sin(p[0]) * std::cos(p[1]), R * std::sin(p[0]) * std::sin(p[1]),
            R * std::cos(p[0])};
  }
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  for (int i = 0; i < dim_; ++i) e[i] = p[i];
  return e;
}

std::string ManifoldModel::describe() const {
  std::ostringstream os;
  if (kind_ == ModelKind::SpaceForm)
    os << "space_form(dim=" << dim_ << ", K=" << K_ << ")";
  else
    os << "surface(" << chart_->name() << ")";
  return os.str();
}

int pole_steps(double length, double step) {
  if (!(length > 0.0)) return 2;
  const double h = step > 0.0 ? step : length / 200.0;
  int n = static_cast<int>(std::ceil(length / h - 1e-9));
  if (n < 2) n = 2;
  if (n % 2) ++n;
  return n;
}

namespace {

void check_stage(const ManifoldModel& model, const Vec& x) {
  if (!model.in_domain(x)) throw Error(ErrorCode::DomainExit, "geodesic left the chart domain");
}

}  // namespace

GeodesicEnd geodesic_endpoint(const ManifoldModel& model, const Vec& p, const Vec& w, int steps) {
  Vec x = p;
  Vec xd = w;
  if (model.is_flat_space()) return {x + xd, xd};
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec k1x = xd;
    const Vec k1v = model.geodesic_accel(x, xd);
    Vec xs = x + 0.5 * h * k1x;
    check_stage(model, xs);
    const Vec k2x = xd + 0.5 * h * k1v;
    const Vec k2v = model.geodesic_accel(xs, k2x);
    xs = x + 0.5 * h * k2x;
    check_stage(model, xs);
    const Vec k3x = xd + 0.5 * h * k2v;
    const Vec k3v = model.geodesic_accel(xs, k3x);
    xs = x + h * k3x;
    check_stage(model, xs);
    const Vec k4x = xd + h * k3v;
    const Vec k4v = model.geodesic_accel(xs, k4x);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    xd += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    check_stage(model, x);
  }
  return {x, xd};
}

PoleGeodesic exp_map(const ManifoldModel& model, const Vec& p, const Vec& v, double length,
                     double step, ExpOptions opts) {
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidArgument, "geodesic length must be positive");
  if (!model.in_domain(p)) throw Error(ErrorCode::OutOfDomain, "geodesic base outside domain");
  const double vn = model.norm(p, v);
  if (std::abs(vn - 1.0) > 1e-10)
    throw Error(ErrorCode::InvalidArgument, "initial direction is not unit length");
  if (model.kind() == ModelKind::SpaceForm && model.curvature_K() > 0.0 && !opts.long_pole &&
      length * std::sqrt(model.curvature_K()) >= M_PI)
    throw Error(ErrorCode::InvalidArgument, "pole reaches the antipode; enable long-pole mode");

  const int n = pole_steps(length, step);
  const double h = length / n;
  PoleGeodesic pole;
  pole.base = p;
  pole.direction = v;
  pole.length = length;
  pole.step = h;
  pole.has_jacobi = opts.jacobi;
  pole.samples.reserve(n + 1);

  const bool space_form = model.kind() == ModelKind::SpaceForm;
  const bool integrate_j = opts.jacobi && !space_form;
  const double K = model.curvature_K();

  Vec x = p;
  Vec xd = v;
  double j = 0.0, jd = 1.0;
  auto push = [&](double u) {
    PoleSample s;
    s.u = u;
    s.x = x;
    s.tangent = xd;
    if (opts.jacobi) s.jacobi = space_form ? jacobi_closed_form(K, u) : j;
    pole.samples.push_back(std::move(s));
  };
  push(0.0);
  for (int i = 0; i < n; ++i) {
    double K1 = 0, K2 = 0, K3 = 0, K4 = 0;
    double* g1 = integrate_j ? &K1 : nullptr;
    double* g2 = integrate_j ? &K2 : nullptr;
    double* g3 = integrate_j ? &K3 : nullptr;
    double* g4 = integrate_j ? &K4 : nullptr;

    const Vec k1x = xd;
    const Vec k1v = model.geodesic_accel(x, xd, g1);
    const double k1j = jd, k1jd = -K1 * j;
    Vec xs = x + 0.5 * h * k1x;
    check_stage(model, xs);
    const Vec k2x = xd + 0.5 * h * k1v;
    const Vec k2v = model.geodesic_accel(xs, k2x, g2);
    const double k2j = jd + 0.5 * h * k1jd, k2jd = -K2 * (j + 0.5 * h * k1j);
    xs = x + 0.5 * h * k2x;
    check_stage(model, xs);
    const Vec k3x = xd + 0.5 * h * k2v;
    const Vec k3v = model.geodesic_accel(xs, k3x, g3);
    const double k3j = jd + 0.5 * h * k2jd, k3jd = -K3 * (j + 0.5 * h * k2j);
    xs = x + h * k3x;
    check_stage(model, xs);
    const Vec k4x = xd + h * k3v;
    const Vec k4v = model.geodesic_accel(xs, k4x, g4);
    const double k4j = jd + h * k3jd, k4jd = -K4 * (j + h * k3j);

    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    xd += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (integrate_j) {
      j += (h / 6.0) * (k1j + 2.0 * k2j + 2.0 * k3j + k4j);
      jd += (h / 6.0) * (k1jd + 2.0 * k2jd + 2.0 * k3jd + k4jd);
    }
    check_stage(model, x);
    push((i + 1) * h);
  }
  if (!model.is_flat_space()) {
    for (const auto& s : pole.samples) {
      const double drift = std::abs(model.norm(s.x, s.tangent) - 1.0);
      if (drift > 1e-6)
        throw Error(ErrorCode::StepTooLarge, "unit-speed drift exceeds 1e-6; reduce the pole step");
    }
  }
  return pole;
}

ShootResult geodesic_shoot(const ManifoldModel& model, const Vec& p, const Vec& q, double length,
                           const Vec& v_guess, const ShootOptions& opts) {
  const int n = model.dimension();
  if (p.size() != n || q.size() != n || v_guess.size() != n)
    throw Error(ErrorCode::InvalidArgument, "shooting dimension mismatch");
  if (!model.in_domain(p) || !model.in_domain(q))
    throw Error(ErrorCode::OutOfDomain, "shooting endpoint outside domain");

  ShootResult res;
  auto finish = [&](const Vec& w, const GeodesicEnd& end, const Mat& J, int it, double r) {
    res.velocity = w;
    res.length = model.norm(p, w);
    res.direction = w / res.length;
    res.end_tangent = end.xdot / model.norm(end.x, end.xdot);
    res.jacobian = J;
    res.iterations = it;
    res.residual = r;
    return res;
  };

  if (model.is_flat_space()) {
    const Vec w = q - p;
    GeodesicEnd end{q, w};
    return finish(w, end, Mat::Identity(n, n), 0, 0.0);
  }

  const double gn = model.norm(p, v_guess);
  if (!(gn > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero initial guess");
  Vec w = v_guess * (length / gn);

  auto endpoint = [&](const Vec& wt) { return geodesic_endpoint(model, p, wt, opts.steps); };
  auto fd_jacobian = [&](const Vec& wt, const Vec& x0) {
    Mat J(n, n);
    const double h = opts.fd_step * std::max(1.0, wt.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      Vec wp = wt;
      wp[i] += h;
      J.col(i) = (endpoint(wp).x - x0) / h;
    }
    return J;
  };

  GeodesicEnd end = endpoint(w);
  Vec r = end.x - q;
  double rn = r.norm();
  Mat J;
  bool fresh;
  if (opts.jacobian && opts.jacobian->rows() == n) {
    J = *opts.jacobian;
    fresh = false;
  } else {
    J = fd_jacobian(w, end.x);
    fresh = true;
  }

  for (int it = 0; it < opts.max_iter; ++it) {
    if (rn < opts.tol) return finish(w, end, J, it, rn);
    const Vec delta = -J.fullPivLu().solve(r);
    double lambda = 1.0;
    bool improved = false;
    Vec w_try;
    GeodesicEnd end_try;
    double rn_try = 0.0;
    for (int k = 0; k < 12; ++k) {
      w_try = w + lambda * delta;
      try {
        end_try = endpoint(w_try);
        rn_try = (end_try.x - q).norm();
        if (std::isfinite(rn_try) && rn_try < rn) {
          improved = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DomainExit && e.code() != ErrorCode::SingularChart &&
            e.code() != ErrorCode::OutOfDomain)
          throw;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      if (!fresh) {
        J = fd_jacobian(w, end.x);
        fresh = true;
        continue;
      }
      throw Error(ErrorCode::NoConvergence, "damped Newton stalled in geodesic shooting (residual " + std::to_string(rn) + ")");
    }
    const double ratio = rn_try / rn;
    w = w_try;
    end = end_try;
    r = end.x - q;
    rn = rn_try;
    if (ratio > 0.25 && rn >= opts.tol) {
      J = fd_jacobian(w, end.x);
      fresh = true;
    } else {
      fresh = false;
    }
  }
  if (rn < opts.tol) return finish(w, end, J, opts.max_iter, rn);
  throw Error(ErrorCode::NoConvergence, "geodesic shooting exceeded the iteration limit");
}

Vec parallel_transport(const ManifoldModel& model, std::span<const Vec> curve, const Vec& w0,
                       int substeps) {
  Vec w = w0;
  if (model.is_flat_space() || curve.size() < 2) return w;
  if (substeps < 1) substeps = 1;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const Vec a = curve[i];
    const Vec dx = curve[i + 1] - curve[i];
    const double h = 1.0 / substeps;
    for (int k = 0; k < substeps; ++k) {
      const double tau = k * h;
      auto f = [&](double t, const Vec& wv) -> Vec {
        const Vec x = a + t * dx;
        check_stage(model, x);
        return -model.christoffel_contract(x, dx, wv);
      };
      const Vec k1 = f(tau, w);
      const Vec k2 = f(tau + 0.5 * h, w + 0.5 * h * k1);
      const Vec k3 = f(tau + 0.5 * h, w + 0.5 * h * k2);
      const Vec k4 = f(tau + h, w + h * k3);
      w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return w;
}

JacobiProfile jacobi_scalar(const ManifoldModel& model, const PoleGeodesic& pole) {
  JacobiProfile prof;
  const PoleGeodesic* src = &pole;
  PoleGeodesic redo;
  // Samples produced without the Jacobi field are integrated again.
  if (model.kind() == ModelKind::EmbeddedSurface && !pole.has_jacobi) {
    redo = exp_map(model, pole.base, pole.direction, pole.length, pole.step, {true, true});
    src = &redo;
  }
  prof.u.reserve(src->samples.size());
  prof.j.reserve(src->samples.size());
  for (const auto& s : src->samples) {
    const double j = model.kind() == ModelKind::SpaceForm
                         ? jacobi_closed_form(model.curvature_K(), s.u)
                         : s.jacobi;
    prof.u.push_back(s.u);
    prof.j.push_back(j);
    if (s.u > 0.0 && j <= 0.0) prof.conjugate_point = true;
  }
  return prof;
}

double jacobi_closed_form(double K, double u) {
  if (K > 0.0) {
    const double k = std::sqrt(K);
    return std::sin(k * u) / k;
  }
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    return std::sinh(k * u) / k;
  }
  return u;
}

double jacobi_closed_form_integral(double K, double ell) {
  if (K > 0.0) {
    const double k = std::sqrt(K);
    const double s = std::sin(0.5 * k * ell) / k;
    return 2.0 * s * s;
  }
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    const double s = std::sinh(0.5 * k * ell) / k;
    return 2.0 * s * s;
  }
  return 0.5 * ell * ell;
}

double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  const std::size_t m = n - 1;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  if (m == 2) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
  std::size_t even = (m % 2 == 0) ? m : m - 3;
  double acc = 0.0;
  if (even > 0) {
    double sum = f[0] + f[even];
    for (std::size_t i = 1; i < even; ++i) sum += (i % 2 ? 4.0 : 2.0) * f[i];
    acc = h / 3.0 * sum;
  }
  if (even != m) {
    const std::size_t a = even;
    acc += 3.0 * h / 8.0 * (f[a] + 3.0 * f[a + 1] + 3.0 * f[a + 2] + f[a + 3]);
  }
  return acc;
}

}  // namespace tractrix
