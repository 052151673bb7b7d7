#include "tractrix/tractor.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tractrix/error.hpp"

namespace tractrix {

CurvePoint FourierCurve::eval(double t) const {
  const int n = static_cast<int>(coords.size());
  CurvePoint p{Vec::Zero(n), Vec::Zero(n)};
  for (int i = 0; i < n; ++i) {
    const FourierCoord& c = coords[i];
    double x = c.c0 + c.lin * t;
    double dx = c.lin;
    for (const auto& term : c.terms) {
      const double w = term[0] * omega;
      const double cs = std::cos(w * t), sn = std::sin(w * t);
      x += term[1] * cs + term[2] * sn;
      dx += w * (-term[1] * sn + term[2] * cs);
    }
    p.x[i] = x;
    p.dx[i] = dx;
  }
  return p;
}

TractorCurve::TractorCurve(Kind kind, Evaluator eval, double t0, double t1, bool geodesic)
    : kind_(kind), eval_(std::move(eval)), t0_(t0), t1_(t1), geodesic_(geodesic) {
  if (!eval_) throw Error(ErrorCode::InvalidArgument, "tractor needs an evaluator");
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "tractor parameter range is empty");
}

int TractorCurve::dimension() const { return static_cast<int>(eval_(t0_).x.size()); }

TractorCurve TractorCurve::reversed() const {
  const double a = t0_, b = t1_;
  Evaluator e = eval_;
  return TractorCurve(
      kind_,
      [e, a, b](double t) {
        CurvePoint p = e(a + b - t);
        p.dx = -p.dx;
        return p;
      },
      a, b, geodesic_);
}

TractorCurve TractorCurve::restricted(double t0, double t1) const {
  return TractorCurve(kind_, eval_, t0, t1, geodesic_);
}

TractorCurve TractorCurve::analytic(const FourierCurve& curve, double t0, double t1,
                                    bool geodesic) {
  if (curve.coords.size() < 2 || curve.coords.size() > 3)
    throw Error(ErrorCode::InvalidArgument, "curve needs 2 or 3 coordinates");
  return TractorCurve(
      Kind::Analytic, [curve](double t) { return curve.eval(t); }, t0, t1, geodesic);
}

namespace {

struct HermiteTable {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> dx;
  bool periodic = false;

  CurvePoint eval(double tt) const {
    const std::size_t n = t.size();
    if (periodic) {
      const double P = t.back() - t.front();
      tt = t.front() + std::fmod(tt - t.front(), P);
      if (tt < t.front()) tt += P;
    }
    std::size_t i;
    if (tt <= t.front()) {
      i = 0;
    } else if (tt >= t.back()) {
      i = n - 2;
    } else {
      i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), tt) - t.begin()) - 1;
      if (i > n - 2) i = n - 2;
    }
    const double h = t[i + 1] - t[i];
    const double u = (tt - t[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const double d00 = (6 * u2 - 6 * u) / h, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = (-6 * u2 + 6 * u) / h, d11 = 3 * u2 - 2 * u;
    CurvePoint p;
    p.x = h00 * x[i] + h10 * h * dx[i] + h01 * x[i + 1] + h11 * h * dx[i + 1];
    p.dx = d00 * x[i] + d10 * dx[i] + d01 * x[i + 1] + d11 * dx[i + 1];
    return p;
  }
};

}  // namespace

TractorCurve TractorCurve::hermite(std::vector<double> t, std::vector<Vec> x, std::vector<Vec> dx,
                                   Kind kind, bool geodesic) {
  if (t.size() < 2 || x.size() != t.size() || dx.size() != t.size())
    throw Error(ErrorCode::InvalidArgument, "Hermite curve needs matching samples");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i + 1] > t[i]))
      throw Error(ErrorCode::InvalidArgument, "Hermite parameters must increase");
  auto table = std::make_shared<HermiteTable>();
  const double t0 = t.front(), t1 = t.back();
  table->t = std::move(t);
  table->x = std::move(x);
  table->dx = std::move(dx);
  table->periodic = kind == Kind::ClosedPolyline;
  return TractorCurve(
      kind, [table](double tt) { return table->eval(tt); }, t0, t1, geodesic);
}

TractorCurve TractorCurve::polyline(const ManifoldModel& model, const std::vector<Vec>& pts,
                                    bool closed) {
  const std::size_t n = pts.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "polyline needs at least 3 vertices");
  if (closed && (pts.front() - pts.back()).norm() > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "closed polyline must repeat its first vertex");
  std::vector<double> t(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const Vec mid = 0.5 * (pts[i] + pts[i - 1]);
    const double len = model.norm(mid, pts[i] - pts[i - 1]);
    if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "repeated polyline vertex");
    t[i] = t[i - 1] + len;
  }
  // Three-point derivative on a nonuniform grid.
  auto deriv = [](const Vec& xm, const Vec& x0, const Vec& xp, double hm, double hp) -> Vec {
    return (-hp * hp * xm + (hp * hp - hm * hm) * x0 + hm * hm * xp) / (hm * hp * (hm + hp));
  };
  std::vector<Vec> dx(n);
  for (std::size_t i = 1; i + 1 < n; ++i)
    dx[i] = deriv(pts[i - 1], pts[i], pts[i + 1], t[i] - t[i - 1], t[i + 1] - t[i]);
  if (closed) {
    const Vec d = deriv(pts[n - 2], pts[0], pts[1], t[n - 1] - t[n - 2], t[1] - t[0]);
    dx[0] = d;
    dx[n - 1] = d;
  } else {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    dx[0] = (-(2 * h1 + h2) / (h1 * (h1 + h2))) * pts[0] + ((h1 + h2) / (h1 * h2)) * pts[1] -
            (h1 / (h2 * (h1 + h2))) * pts[2];
    const double g1 = t[n - 1] - t[n - 2], g2 = t[n - 2] - t[n - 3];
    dx[n - 1] = ((2 * g1 + g2) / (g1 * (g1 + g2))) * pts[n - 1] -
                ((g1 + g2) / (g1 * g2)) * pts[n - 2] + (g1 / (g2 * (g1 + g2))) * pts[n - 3];
  }
  return hermite(std::move(t), pts, std::move(dx),
                 closed ? Kind::ClosedPolyline : Kind::Polyline, false);
}

TractorCurve TractorCurve::geodesic(const ManifoldModel& model, const Vec& p, const Vec& v,
                                    double t0, double t1, double step) {
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "empty geodesic range");
  const double h = step > 0.0 ? step : 0.01;
  const Vec u = v / model.norm(p, v);
  std::vector<double> ts;
  std::vector<Vec> xs, dxs;
  // Backward branch (reversed), then forward branch from p.
  if (t0 < 0.0) {
    const PoleGeodesic back = exp_map(model, p, -u, -t0, h, {true, false});
    for (std::size_t i = back.samples.size(); i-- > 1;) {
      ts.push_back(-back.samples[i].u);
      xs.push_back(back.samples[i].x);
      dxs.push_back(-back.samples[i].tangent);
    }
  }
  ts.push_back(0.0);
  xs.push_back(p);
  dxs.push_back(u);
  if (t1 > 0.0) {
    const PoleGeodesic fwd = exp_map(model, p, u, t1, h, {true, false});
    for (std::size_t i = 1; i < fwd.samples.size(); ++i) {
      ts.push_back(fwd.samples[i].u);
      xs.push_back(fwd.samples[i].x);
      dxs.push_back(fwd.samples[i].tangent);
    }
  }
  TractorCurve c = hermite(std::move(ts), std::move(xs), std::move(dxs), Kind::Analytic, true);
  return c.restricted(t0, t1);
}

TractorCurve TractorCurve::disk_diameter(double K, double angle, double t0, double t1) {
  if (!(K < 0.0)) throw Error(ErrorCode::InvalidArgument, "disk diameter needs K < 0");
  const double k = std::sqrt(-K);
  const double c = std::cos(angle), s = std::sin(angle);
  return TractorCurve(
      Kind::Analytic,
      [k, c, s](double t) {
        const double r = std::tanh(0.5 * k * t);
        const double dr = 0.5 * k * (1.0 - r * r);
        return CurvePoint{vec2(r * c, r * s), vec2(dr * c, dr * s)};
      },
      t0, t1, true);
}

TractorCurve sphere_equator(double K, double phi0, double t0, double t1) {
  if (!(K > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere needs K > 0");
  FourierCurve c;
  c.coords = {FourierCoord{M_PI / 2, 0.0, {}}, FourierCoord{phi0, std::sqrt(K), {}}};
  return TractorCurve::analytic(c, t0, t1, true);
}

TractorCurve sphere_latitude(double K, double theta, double phi0, double t0, double t1) {
  if (!(K > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere needs K > 0");
  const double rate = std::sqrt(K) / std::sin(theta);
  FourierCurve c;
  c.coords = {FourierCoord{theta, 0.0, {}}, FourierCoord{phi0, rate, {}}};
  return TractorCurve::analytic(c, t0, t1, std::abs(theta - M_PI / 2) < 1e-15);
}

}  // namespace tractrix
