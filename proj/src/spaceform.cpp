#include "tractrix/spaceform.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "tractrix/error.hpp"
#include "tractrix/manifold.hpp"

namespace tractrix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponent rate r with sin(kd) (resp. sinh(kd), d) = sin(kd0) * exp(-r s).
double decay_rate(const SpaceFormSolution& sol) {
  if (sol.K > 0.0) return sol.k / std::tan(sol.k * sol.ell);
  if (sol.K < 0.0) return sol.k / std::tanh(sol.k * sol.ell);
  return 1.0 / sol.ell;
}

// J^K(ell) of the pole.
double jacobi_ell(const SpaceFormSolution& sol) { return jacobi_closed_form(sol.K, sol.ell); }

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  if (b == a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - M_LN2;
}

}  // namespace

SpaceFormSolution solve_from_d0(double K, double ell, double d0, bool long_pole) {
  if (!(ell > 0.0) || !std::isfinite(ell))
    throw Error(ErrorCode::DomainViolation, "pole length must be positive");
  if (!(d0 > 0.0) || !(d0 <= ell))
    throw Error(ErrorCode::DomainViolation, "initial distance must satisfy 0 < d0 <= ell");
  SpaceFormSolution sol;
  sol.K = K;
  sol.k = std::sqrt(std::abs(K));
  sol.ell = ell;
  sol.d0 = d0;
  sol.long_pole = long_pole;
  const double k = sol.k;
  if (K > 0.0) {
    const double kl = k * ell;
    if (long_pole) {
      if (!(kl < M_PI)) throw Error(ErrorCode::DomainViolation, "long pole needs k ell < pi");
      if (!(k * d0 < M_PI - kl) && kl > M_PI / 2)
        throw Error(ErrorCode::DomainViolation, "initial distance beyond the long-pole cusp");
    } else if (kl > M_PI / 2 + 1e-12) {
      throw Error(ErrorCode::DomainViolation, "standard mode needs k ell <= pi/2");
    }
    sol.constant = std::abs(std::cos(kl)) < 1e-14;
    sol.C_d = sol.constant ? kInf : -std::log(std::sin(k * d0)) / (k / std::tan(kl));
    sol.C_kappa = std::sin(k * d0) / std::sin(kl);
  } else if (K < 0.0) {
    const double kl = k * ell;
    sol.C_d = -std::log(std::sinh(k * d0)) / (k / std::tanh(kl));
    sol.C_kappa = std::sinh(k * d0) / std::sinh(kl);
  } else {
    sol.C_d = -ell * std::log(d0);
    sol.C_kappa = d0 / ell;
  }
  sol.kappa0 = d0 == ell ? kInf : kappa_from_dist(K, ell, d0);
  return sol;
}

double dist_at(const SpaceFormSolution& sol, double s) {
  const double k = sol.k;
  if (sol.K > 0.0) {
    if (sol.constant) return sol.d0;
    const double x = std::sin(k * sol.d0) * std::exp(-decay_rate(sol) * s);
    if (x > 1.0) throw Error(ErrorCode::DomainViolation, "long-pole distance past its cusp");
    return std::asin(x) / k;
  }
  if (sol.K < 0.0) return std::asinh(std::sinh(k * sol.d0) * std::exp(-decay_rate(sol) * s)) / k;
  return sol.d0 * std::exp(-s / sol.ell);
}

double kappa_at(const SpaceFormSolution& sol, double s) {
  // sin B(s) = C_kappa e^{-r s}; kappa = tan B / J(ell).
  const double x = sol.constant ? 0.0 : decay_rate(sol) * s;
  const double lnC = std::log(sol.C_kappa);
  const double one_minus = -std::expm1(2.0 * (lnC - x));
  if (one_minus < 0.0) throw Error(ErrorCode::DomainViolation, "kappa denominator non-positive");
  if (one_minus == 0.0) return kInf;
  return std::exp(lnC - x) / (jacobi_ell(sol) * std::sqrt(one_minus));
}

double kappa_from_dist(double K, double ell, double d) {
  if (!(d >= 0.0) || !(d < ell))
    throw Error(ErrorCode::DomainViolation, "kappa_from_dist needs 0 <= d < ell");
  if (K > 0.0) {
    const double k = std::sqrt(K);
    const double q = std::sin(k * (ell - d)) * std::sin(k * (ell + d));
    if (!(q > 0.0)) throw Error(ErrorCode::DomainViolation, "distance beyond the spherical cusp");
    return k * std::sin(k * d) / (std::sin(k * ell) * std::sqrt(q));
  }
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    const double q = std::sinh(k * (ell - d)) * std::sinh(k * (ell + d));
    return k * std::sinh(k * d) / (std::sinh(k * ell) * std::sqrt(q));
  }
  return d / (ell * std::sqrt((ell - d) * (ell + d)));
}

double leading_exponent(double K, double ell) {
  if (K > 0.0) {
    const double k = std::sqrt(K);
    if (!(k * ell < M_PI)) throw Error(ErrorCode::DomainViolation, "leading exponent needs k ell < pi");
    return -k / std::tan(k * ell);
  }
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    return -k / std::tanh(k * ell);
  }
  return -1.0 / ell;
}

ClassicalPoint classical_tractrix(double ell, double t) {
  const double x = t / ell;
  ClassicalPoint p;
  p.point = vec2(t - ell * std::tanh(x), ell / std::cosh(x));
  p.s = (t < 0.0 ? -1.0 : 1.0) * ell * log_cosh(x);
  return p;
}

double classical_t_of_s(double ell, double s) {
  const double y = std::expm1(std::abs(s) / ell);
  const double t = ell * std::log1p(y + std::sqrt(y * (y + 2.0)));
  return s < 0.0 ? -t : t;
}

std::vector<LongPoleSample> long_pole_vertices(double ell, double d0, double s_max, int samples) {
  if (!(ell > M_PI / 2 && ell < M_PI))
    throw Error(ErrorCode::DomainViolation, "long pole needs pi/2 < ell < pi");
  if (!(d0 > 0.0 && d0 < ell)) throw Error(ErrorCode::DomainViolation, "need 0 < d0 < ell");
  if (!(s_max >= 0.0) || samples < 2)
    throw Error(ErrorCode::DomainViolation, "need s_max >= 0 and at least two samples");
  const double sl = std::sin(ell);
  const double rate = 1.0 / std::tan(ell);  // negative: d grows
  auto dist = [&](double s) {
    const double x = std::sin(d0) * std::exp(-rate * s);
    if (!(x < sl)) throw Error(ErrorCode::DomainViolation, "s_max reaches the long-pole cusp");
    return std::asin(x);
  };
  dist(s_max);
  // dt/ds = sec B with sin B = sin d / sin ell.
  auto rate_t = [&](double s) {
    const double sd = std::sin(dist(s));
    return sl / std::sqrt((sl - sd) * (sl + sd));
  };
  std::vector<LongPoleSample> out;
  out.reserve(samples);
  const double a0 = std::acos(std::cos(ell) / std::cos(d0));
  double t = a0;
  double s_prev = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = s_max * i / (samples - 1);
    if (i > 0) t += integrate_adaptive(rate_t, s_prev, s, 1e-12);
    s_prev = s;
    LongPoleSample p;
    p.s = s;
    p.t = t;
    p.d = dist(s);
    p.a = std::acos(std::cos(ell) / std::cos(p.d));
    p.A = vec2(M_PI / 2 - p.d, t - p.a);
    p.B = vec2(M_PI / 2, t);
    p.C = vec2(M_PI / 2, t - p.a);
    out.push_back(std::move(p));
  }
  return out;
}

TractrixTrace long_pole_sphere(double ell, double d0, double s_max, int samples) {
  const auto verts = long_pole_vertices(ell, d0, s_max, samples);
  TractrixTrace trace;
  trace.ell = ell;
  trace.geodesic_tractor = true;
  trace.model = ManifoldModel::space_form(2, 1.0);
  trace.dt = verts.size() > 1 ? verts[1].t - verts[0].t : 0.0;
  const double sl = std::sin(ell);
  for (const auto& v : verts) {
    TraceRecord r;
    r.t = v.t;
    r.s = v.s;
    r.gamma = v.A;
    r.eta = v.B;
    r.pole_length = ell;
    r.d = v.d;
    r.has_d = true;
    r.kappa = kappa_from_dist(1.0, ell, v.d);
    const double sd = std::sin(v.d);
    r.speed = std::sqrt((sl - sd) * (sl + sd)) / sl;  // cos B
    r.eta_speed = 1.0;
    r.omega = r.kappa * r.speed;
    r.jacobi_ell = sl;
    r.jacobi_int = 1.0 - std::cos(ell);
    r.sigma = 1;
    trace.records.push_back(std::move(r));
  }
  return trace;
}

}  // namespace tractrix
