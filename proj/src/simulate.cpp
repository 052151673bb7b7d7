#include "tractrix/simulate.hpp"

#include <cmath>
#include <limits>

#include "tractrix/error.hpp"
#include "tractrix/kernels.hpp"

namespace tractrix {

Vec euclidean_rhs(const Vec& eta, const Vec& eta_prime, const Vec& gamma, double ell) {
  const Vec lam = eta - gamma;
  if (std::abs(lam.norm() - ell) > 1e-6)
    throw Error(ErrorCode::PoleLengthDrift, "pole length differs from ell by more than 1e-6");
  const Vec u = lam / ell;
  return eta_prime.dot(u) * u;
}

namespace {

struct Step {
  Vec vel;      // dgamma/dt
  double rate;  // ds/dt >= 0
};

class ShootingStepper {
 public:
  ShootingStepper(const ManifoldModel& model, const TractorCurve& tractor, double ell,
                  const SimParams& p)
      : model_(model), tractor_(tractor), ell_(ell), steps_(pole_steps(ell, p.pole_step)) {}

  ShootResult shoot(const Vec& g, double t, const Vec& w_guess) {
    ShootOptions o;
    o.steps = steps_;
    if (jac_.size() > 0) o.jacobian = &jac_;
    try {
      ShootResult r = geodesic_shoot(model_, g, tractor_.at(t).x, ell_, w_guess, o);
      jac_ = r.jacobian;
      return r;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoConvergence || e.code() == ErrorCode::DomainExit)
        throw Error(ErrorCode::ShootingLost, std::string("pole lost at t = ") +
                                                 std::to_string(t) + " (" + e.what() + ")");
      throw;
    }
  }

  Step rhs(double t, const Vec& g, const Vec& w_guess) {
    const ShootResult sh = shoot(g, t, w_guess);
    const CurvePoint e = tractor_.at(t);
    const double sp = model_.inner(e.x, e.dx, sh.end_tangent);
    return {sp * sh.direction, std::abs(sp)};
  }

  // Moves g along its pole so that the pole has length ell again.
  ShootResult project(Vec& g, double t, const Vec& w_guess) {
    ShootResult sh = shoot(g, t, w_guess);
    if (std::abs(sh.length - ell_) > 1e-13) {
      const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sh.length - ell_) * steps_ / ell_)));
      g = geodesic_endpoint(model_, g, sh.direction * (sh.length - ell_), n).x;
      sh = shoot(g, t, sh.direction * ell_);
    }
    return sh;
  }

 private:
  const ManifoldModel& model_;
  const TractorCurve& tractor_;
  double ell_;
  int steps_;
  Mat jac_;
};

TraceRecord make_record(double t, double s, const Vec& g, const Vec& eta, const Vec& v,
                        const Vec& T, double L) {
  TraceRecord r;
  r.t = t;
  r.s = s;
  r.gamma = g;
  r.eta = eta;
  r.pole_dir = v;
  r.pole_end_tangent = T;
  r.pole_length = L;
  return r;
}

}  // namespace

TractrixTrace simulate(const ManifoldModel& model, const TractorCurve& tractor, const Vec& gamma0,
                       double ell, const SimParams& params) {
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole length must be positive");
  if (!(params.dt > 0.0) || !(params.cusp_speed_eps > 0.0) || params.pole_step < 0.0 ||
      params.max_records < 2)
    throw Error(ErrorCode::InvalidArgument, "simulation parameters must be positive");
  const int dim = model.dimension();
  if (gamma0.size() != dim || tractor.dimension() != dim)
    throw Error(ErrorCode::InvalidArgument, "dimension mismatch between model, tractor and gamma0");
  if (!model.in_domain(gamma0)) throw Error(ErrorCode::OutOfDomain, "gamma0 outside the chart");

  const double t0 = tractor.t0(), t1 = tractor.t1();
  const long n = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / params.dt - 1e-9)));
  if (static_cast<std::size_t>(n + 1) > params.max_records)
    throw Error(ErrorCode::RecordOverflow, "trace would exceed max_records");
  const double h = (t1 - t0) / n;

  TractrixTrace trace;
  trace.ell = ell;
  trace.dt = h;
  trace.geodesic_tractor = tractor.is_geodesic();
  trace.model = model;
  trace.records.reserve(n + 1);

  Vec g = gamma0;
  double s = 0.0;
  const bool flat = model.is_flat_space() && !params.force_shooting;

  if (flat) {
    auto f = [&](double t, const Vec& gg) -> Step {
      const CurvePoint e = tractor.at(t);
      const Vec lam = e.x - gg;
      const double p = e.dx.dot(lam);
      // Projection form: the pole length is an attracting invariant.
      return {lam * (p / (ell * ell)), std::abs(p) / lam.norm()};
    };
    {
      const Vec lam = tractor.at(t0).x - g;
      if (std::abs(lam.norm() - ell) > 1e-6)
        throw Error(ErrorCode::PoleLengthDrift, "gamma0 is not at pole distance from eta(t0)");
      const Vec v = lam / lam.norm();
      trace.records.push_back(make_record(t0, s, g, tractor.at(t0).x, v, v, lam.norm()));
    }
    for (long k = 0; k < n; ++k) {
      const double t = t0 + k * h;
      const double tn = (k + 1 == n) ? t1 : t0 + (k + 1) * h;
      const Step k1 = f(t, g);
      const Step k2 = f(t + 0.5 * h, g + 0.5 * h * k1.vel);
      const Step k3 = f(t + 0.5 * h, g + 0.5 * h * k2.vel);
      const Step k4 = f(tn, g + h * k3.vel);
      g += (h / 6.0) * (k1.vel + 2.0 * k2.vel + 2.0 * k3.vel + k4.vel);
      s += (h / 6.0) * (k1.rate + 2.0 * k2.rate + 2.0 * k3.rate + k4.rate);
      const Vec eta = tractor.at(tn).x;
      Vec lam = eta - g;
      const Vec v = lam / lam.norm();
      g = eta - ell * v;
      trace.records.push_back(make_record(tn, s, g, eta, v, v, ell));
    }
  } else {
    ShootingStepper st(model, tractor, ell, params);
    ShootResult sh;
    try {
      sh = st.shoot(g, t0, tractor.at(t0).x - g);
    } catch (const Error& e) {
      throw Error(ErrorCode::ShootingLost, std::string("initial pole not found: ") + e.what());
    }
    if (std::abs(sh.length - ell) > 1e-6)
      throw Error(ErrorCode::PoleLengthDrift, "gamma0 is not at pole distance from eta(t0)");
    trace.records.push_back(
        make_record(t0, s, g, tractor.at(t0).x, sh.direction, sh.end_tangent, sh.length));
    Vec w = sh.direction * ell;
    Vec w_prev = w;
    for (long k = 0; k < n; ++k) {
      const double t = t0 + k * h;
      const double tn = (k + 1 == n) ? t1 : t0 + (k + 1) * h;
      const Vec dw = w - w_prev;
      const Step k1 = st.rhs(t, g, w);
      const Step k2 = st.rhs(t + 0.5 * h, g + 0.5 * h * k1.vel, w + 0.5 * dw);
      const Step k3 = st.rhs(t + 0.5 * h, g + 0.5 * h * k2.vel, w + 0.5 * dw);
      const Step k4 = st.rhs(tn, g + h * k3.vel, w + dw);
      g += (h / 6.0) * (k1.vel + 2.0 * k2.vel + 2.0 * k3.vel + k4.vel);
      s += (h / 6.0) * (k1.rate + 2.0 * k2.rate + 2.0 * k3.rate + k4.rate);
      if (!model.in_domain(g)) throw Error(ErrorCode::DomainExit, "tractrix left the chart domain");
      sh = st.project(g, tn, w + dw);
      w_prev = w;
      w = sh.direction * ell;
      trace.records.push_back(
          make_record(tn, s, g, tractor.at(tn).x, sh.direction, sh.end_tangent, sh.length));
    }
  }

  annotate_records(tractor, trace, params.pole_step, params.cusp_speed_eps,
                   params.parallel ? Exec::Parallel : Exec::Serial);
  mark_cusps(trace, params.cusp_speed_eps);
  return trace;
}

TractrixTrace pushed_simulate(const ManifoldModel& model, const TractorCurve& tractor,
                              const Vec& gamma0, double ell, const SimParams& params) {
  return simulate(model, tractor.reversed(), gamma0, ell, params);
}

namespace {

bool stationary(const TraceRecord& r, double eps) {
  return std::abs(r.speed) <= eps * r.eta_speed || r.eta_speed == 0.0;
}

CuspRecord crossing(const TraceRecord& a, const TraceRecord& b, std::size_t ia) {
  const double f = a.speed / (a.speed - b.speed);
  CuspRecord c;
  c.t = a.t + f * (b.t - a.t);
  c.s = a.s + f * (b.s - a.s);
  c.turning_angle = M_PI;
  c.pole_rotation = 0.0;
  c.first = ia;
  c.last = ia + 1;
  return c;
}

}  // namespace

std::optional<CuspRecord> detect_cusp(std::span<const TraceRecord> w, double eps) {
  if (w.size() < 3) return std::nullopt;
  const TraceRecord &a = w[0], &b = w[1], &c = w[2];
  if (stationary(b, eps)) {
    CuspRecord r;
    r.t = b.t;
    r.s = b.s;
    r.first = r.last = 1;
    r.turning_angle = (a.speed * c.speed < 0.0) ? M_PI : 0.0;
    return r;
  }
  if (!stationary(a, eps) && a.speed * b.speed < 0.0) return crossing(a, b, 0);
  if (!stationary(c, eps) && b.speed * c.speed < 0.0) return crossing(b, c, 1);
  return std::nullopt;
}

void mark_cusps(TractrixTrace& trace, double eps) {
  auto& rec = trace.records;
  trace.cusps.clear();
  const std::size_t n = rec.size();
  for (auto& r : rec) r.singular = stationary(r, eps);

  // Signs: stationary records inherit the previous regular sign.
  int sign = 1;
  for (const auto& r : rec)
    if (!r.singular) {
      sign = r.speed > 0.0 ? 1 : -1;
      break;
    }
  for (auto& r : rec) {
    if (!r.singular) sign = r.speed > 0.0 ? 1 : -1;
    r.sigma = sign;
  }

  std::size_t i = 0;
  while (i < n) {
    if (rec[i].singular) {
      std::size_t j = i;
      while (j + 1 < n && rec[j + 1].singular) ++j;
      CuspRecord c;
      c.first = i;
      c.last = j;
      const std::size_t mid = (i + j) / 2;
      c.t = rec[mid].t;
      c.s = rec[mid].s;
      for (std::size_t k = i; k < j; ++k)
        c.pole_rotation += 0.5 * (rec[k].omega + rec[k + 1].omega) * (rec[k + 1].t - rec[k].t);
      const bool flip = i > 0 && j + 1 < n && rec[i - 1].speed * rec[j + 1].speed < 0.0;
      c.turning_angle = (flip ? M_PI : 0.0) + c.pole_rotation;
      trace.cusps.push_back(c);
      i = j + 1;
      continue;
    }
    if (i + 1 < n && !rec[i + 1].singular && rec[i].speed * rec[i + 1].speed < 0.0)
      trace.cusps.push_back(crossing(rec[i], rec[i + 1], i));
    ++i;
  }
}

TractorCurve tractor_from_tractrix(const ManifoldModel& model, const TractorCurve& gamma,
                                   double ell, int sign, double pole_step) {
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole length must be positive");
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  const int steps = pole_steps(ell, pole_step);
  auto end = [model, gamma, ell, sign, steps](double s) -> Vec {
    const CurvePoint g = gamma.at(s);
    const double speed = model.norm(g.x, g.dx);
    if (!(speed > 0.0)) throw Error(ErrorCode::SingularChart, "tractrix has zero speed");
    return geodesic_endpoint(model, g.x, g.dx * (sign * ell / speed), steps).x;
  };
  return TractorCurve(
      gamma.kind(),
      [end](double s) {
        const double h = 1e-5 * std::max(1.0, std::abs(s));
        return CurvePoint{end(s), (end(s + h) - end(s - h)) / (2.0 * h)};
      },
      gamma.t0(), gamma.t1(), gamma.is_geodesic());
}

Vec unit_normal(const ManifoldModel& model, const Vec& x, const Vec& a, int side) {
  if (model.dimension() != 2) throw Error(ErrorCode::InvalidArgument, "normal needs a 2D model");
  const double an = model.norm(x, a);
  const Vec ah = a / an;
  Vec e = vec2(-a[1], a[0]) * static_cast<double>(side);
  e -= model.inner(x, e, ah) * ah;
  return e / model.norm(x, e);
}

double pole_distance(const ManifoldModel& model, const Vec& p, const Vec& q, double guess_length,
                     double pole_step) {
  ShootOptions o;
  o.steps = pole_steps(guess_length, pole_step);
  return geodesic_shoot(model, p, q, guess_length, q - p, o).length;
}

Vec place_behind(const ManifoldModel& model, const TractorCurve& tractor, double ell) {
  const CurvePoint c = tractor.at(tractor.t0());
  const double sp = model.norm(c.x, c.dx);
  return geodesic_endpoint(model, c.x, c.dx * (-ell / sp), pole_steps(ell, 0.0)).x;
}

Vec place_at_offset(const ManifoldModel& model, const TractorCurve& tractor, double ell, double d0,
                    int side) {
  if (!(d0 >= 0.0) || !(d0 <= ell))
    throw Error(ErrorCode::InvalidArgument, "offset must satisfy 0 <= d0 <= ell");
  const double t0 = tractor.t0();
  const int steps = pole_steps(ell, 0.0);
  const Vec target = tractor.at(t0).x;
  if (model.is_flat_space() && model.dimension() == 2) {
    // Exact for a straight tractor.
    const CurvePoint c = tractor.at(t0);
    const Vec u = c.dx / c.dx.norm();
    const Vec nrm = vec2(-u[1], u[0]) * static_cast<double>(side);
    return target - std::sqrt(ell * ell - d0 * d0) * u + d0 * nrm;
  }
  auto foot_point = [&](double a) {
    const CurvePoint c = tractor.at(t0 - a);
    return geodesic_endpoint(model, c.x, unit_normal(model, c.x, c.dx, side) * d0, steps).x;
  };
  auto f = [&](double a) { return pole_distance(model, foot_point(a), target, ell) - ell; };
  // Secant iteration on the arclength a from the foot to eta(t0).
  double a0 = std::sqrt(ell * ell - d0 * d0);
  double a1 = a0 * 1.001 + 1e-6;
  double f0 = f(a0), f1 = f(a1);
  for (int it = 0; it < 60 && std::abs(f1) > 1e-13; ++it) {
    if (f1 == f0) break;
    const double a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
    a0 = a1;
    f0 = f1;
    a1 = a2;
    f1 = f(a1);
  }
  if (!(std::abs(f1) < 1e-10))
    throw Error(ErrorCode::NoConvergence, "could not place gamma0 at the requested offset");
  return foot_point(a1);
}

Foot project_to_geodesic(const ManifoldModel& model, const TractorCurve& tractor, const Vec& gamma,
                         double t_guess, int steps) {
  // Stage 1: metric-weighted chart projection, a good start for small d.
  double tau = t_guess;
  auto g1 = [&](double tt) {
    const CurvePoint c = tractor.at(tt);
    return model.inner(c.x, c.x - gamma, c.dx);
  };
  for (int it = 0; it < 40; ++it) {
    const double hh = 1e-6 * std::max(1.0, std::abs(tau));
    const double f0 = g1(tau);
    const double df = (g1(tau + hh) - g1(tau - hh)) / (2.0 * hh);
    if (df == 0.0) break;
    const double step = f0 / df;
    tau -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(tau))) break;
  }
  if (model.is_flat_space()) {
    // Perpendicular part only: the foot error along the line drops out.
    const CurvePoint c = tractor.at(tau);
    const Vec u = c.dx / c.dx.norm();
    const Vec r = gamma - c.x;
    return {tau, (r - r.dot(u) * u).norm()};
  }

  // Stage 2: Newton in (tau, signed d) on exp(eta(tau), d N(tau)) = gamma.
  const CurvePoint c0 = tractor.at(tau);
  const Vec N0 = unit_normal(model, c0.x, c0.dx);
  double d = model.norm(c0.x, gamma - c0.x);
  if (model.inner(c0.x, gamma - c0.x, N0) < 0.0) d = -d;
  auto residual = [&](double tt, double dd) -> Vec {
    const CurvePoint c = tractor.at(tt);
    const Vec N = unit_normal(model, c.x, c.dx);
    return geodesic_endpoint(model, c.x, N * dd, steps).x - gamma;
  };
  Vec r = residual(tau, d);
  for (int it = 0; it < 40 && r.norm() > 1e-13; ++it) {
    const double ht = 1e-7 * std::max(1.0, std::abs(tau));
    const double hd = 1e-7;
    Mat J(2, 2);
    J.col(0) = (residual(tau + ht, d) - r) / ht;
    J.col(1) = (residual(tau, d + hd) - r) / hd;
    const Vec delta = -J.fullPivLu().solve(r);
    double lambda = 1.0;
    bool ok = false;
    for (int k = 0; k < 20; ++k) {
      const Vec rt = residual(tau + lambda * delta[0], d + lambda * delta[1]);
      if (rt.norm() < r.norm()) {
        tau += lambda * delta[0];
        d += lambda * delta[1];
        r = rt;
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!ok) break;
  }
  if (!(r.norm() < 1e-9)) throw Error(ErrorCode::NoConvergence, "projection foot not found");
  return {tau, std::abs(d)};
}

}  // namespace tractrix
