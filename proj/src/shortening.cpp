#include "tractrix/shortening.hpp"

#include <algorithm>
#include <cmath>

#include "tractrix/error.hpp"
#include "tractrix/functionals.hpp"
#include "tractrix/simulate.hpp"
#include "tractrix/tractor.hpp"

namespace tractrix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double curvature_at(const ManifoldModel& model, const Vec& xm, const Vec& x0, const Vec& xp) {
  const double hm = model.norm(0.5 * (xm + x0), x0 - xm);
  const double hp = model.norm(0.5 * (x0 + xp), xp - x0);
  const double den = hm * hp * (hm + hp);
  const Vec d1 = (-hp * hp * xm + (hp * hp - hm * hm) * x0 + hm * hm * xp) / den;
  const Vec d2 = 2.0 * (hp * xm - (hm + hp) * x0 + hm * xp) / den;
  const Vec a = d2 + model.christoffel_contract(x0, d1, d1);
  const double v2 = model.inner(x0, d1, d1);
  const Vec T = d1 / std::sqrt(v2);
  const Vec perp = a - model.inner(x0, a, T) * T;
  return model.norm(x0, perp) / v2;
}

// Parameter t on the tractor where the geodesic distance from x reaches ell,
// starting from the chord-length guess t0 + ell.
double splice_parameter(const ManifoldModel& model, const TractorCurve& tractor, const Vec& x,
                        double ell, double pole_step) {
  const double t0 = tractor.t0(), t1 = tractor.t1();
  double t = std::min(t0 + ell, t1);
  ShootOptions so;
  so.steps = pole_steps(ell, pole_step);
  CurvePoint c = tractor.at(t);
  Vec dir = c.x - x;
  double len = model.norm(x, dir);
  if (!(len > 0.0)) dir = c.dx, len = ell;
  for (int it = 0; it < 60; ++it) {
    c = tractor.at(t);
    const ShootResult sh = geodesic_shoot(model, x, c.x, len, dir, so);
    const double f = sh.length - ell;
    if (std::abs(f) < 1e-10) return t;
    const double df = model.inner(c.x, c.dx, sh.end_tangent);
    if (!(df > 0.0)) throw Error(ErrorCode::NoConvergence, "splice point search stalled");
    double tn = t - f / df;
    if (tn >= t1) {
      if (t == t1) throw Error(ErrorCode::PoleTooLong, "curve never reaches distance ell");
      tn = t1;
    }
    t = std::max(tn, t0);
    dir = sh.direction;
    len = sh.length;
  }
  throw Error(ErrorCode::NoConvergence, "splice point search did not converge");
}

// The tractrix as a tractor curve in its arclength, optionally reversed and
// translated by `shift`.
TractorCurve trace_tractor(const TractrixTrace& tr, bool reverse, const Vec& shift) {
  std::vector<double> s;
  std::vector<Vec> x, dx;
  for (const auto& r : tr.records) {
    const int sign = r.speed > 0.0 ? 1 : (r.speed < 0.0 ? -1 : r.sigma);
    const Vec d = static_cast<double>(sign) * r.pole_dir;
    if (!s.empty() && !(r.s > s.back() + 1e-12)) {
      // Keep the exact end point of a trailing stationary run.
      if (&r == &tr.records.back()) {
        x.back() = r.gamma + shift;
        dx.back() = d;
      }
      continue;
    }
    s.push_back(r.s);
    x.push_back(r.gamma + shift);
    dx.push_back(d);
  }
  if (reverse) {
    const double end = s.back();
    std::reverse(s.begin(), s.end());
    std::reverse(x.begin(), x.end());
    std::reverse(dx.begin(), dx.end());
    for (auto& v : s) v = end - v;
    for (auto& v : dx) v = -v;
  }
  return TractorCurve::hermite(std::move(s), std::move(x), std::move(dx));
}

double trace_residual(const TractrixTrace& tr) {
  double r = 0.0;
  for (const auto& rec : tr.records) {
    if (rec.singular) return kInf;
    r = std::max(r, rec.kappa);
  }
  return r;
}

// Tractrix samples followed by the final pole.
std::vector<Vec> iterate_curve(const TractrixTrace& tr, double pole_step) {
  std::vector<Vec> c;
  c.reserve(tr.records.size() + 64);
  for (const auto& r : tr.records) c.push_back(r.gamma);
  const TraceRecord& last = tr.records.back();
  const PoleGeodesic pole = exp_map(tr.model, last.gamma, last.pole_dir, tr.ell, pole_step,
                                    {true, false});
  for (std::size_t i = 1; i < pole.samples.size(); ++i) c.push_back(pole.samples[i].x);
  c.back() = last.eta;
  return c;
}

double endpoint_distance(const ManifoldModel& model, const std::vector<Vec>& pts, double pole_step) {
  const Vec& P = pts.front();
  const Vec& Q = pts.back();
  if (model.is_flat_space()) return (Q - P).norm();
  const double guess = model.norm(0.5 * (P + Q), Q - P);
  try {
    return pole_distance(model, P, Q, guess, pole_step);
  } catch (const Error&) {
    return polyline_length(model, pts);
  }
}

}  // namespace

double polyline_length(const ManifoldModel& model, const std::vector<Vec>& pts) {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    L += model.norm(0.5 * (pts[i] + pts[i + 1]), pts[i + 1] - pts[i]);
  return L;
}

double polyline_geodesic_residual(const ManifoldModel& model, const std::vector<Vec>& pts,
                                  const Vec* deck) {
  const std::size_t n = pts.size();
  double r = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    r = std::max(r, curvature_at(model, pts[i - 1], pts[i], pts[i + 1]));
  if (deck && n >= 3) r = std::max(r, curvature_at(model, pts[n - 2] - *deck, pts[0], pts[1]));
  return r;
}

ShorteningRun self_repeated(const ManifoldModel& model, const Vec& P, const Vec& Q,
                            const std::vector<Vec>& initial, double ell,
                            const ShorteningOptions& opts) {
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole length must be positive");
  if (initial.size() < 3) throw Error(ErrorCode::InvalidArgument, "initial curve too short");
  if ((initial.front() - P).norm() > 1e-9 || (initial.back() - Q).norm() > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "initial curve must connect P to Q");
  if (endpoint_distance(model, initial, opts.sim.pole_step) < ell)
    throw Error(ErrorCode::PoleTooLong, "dist(P, Q) is smaller than the pole length");

  ShorteningRun run;
  run.mode = ShorteningMode::SelfRepeated;
  run.P = P;
  run.Q = Q;
  run.initial = initial;
  run.ell = ell;
  run.deck = Vec::Zero(P.size());
  run.iterates.push_back(
      {opts.keep_curves ? initial : std::vector<Vec>{}, polyline_length(model, initial),
       polyline_geodesic_residual(model, initial)});
  if (run.iterates[0].residual < opts.tol) {
    run.stop_reason = "residual";
    return run;
  }

  const TractorCurve poly = TractorCurve::polyline(model, initial);
  const double ts = splice_parameter(model, poly, P, ell, opts.sim.pole_step);
  TractorCurve tractor = poly.restricted(ts, poly.t1());
  Vec g0 = P;
  bool forward = true;
  double prev = run.iterates[0].length;
  run.stop_reason = "max_iter";
  for (int it = 1; it <= opts.max_iter; ++it) {
    const TractrixTrace tr = simulate(model, tractor, g0, ell, opts.sim);
    ShorteningIterate iter;
    iter.length = tractrix_length(tr) + ell;
    iter.residual = trace_residual(tr);
    if (opts.keep_curves) {
      iter.curve = iterate_curve(tr, opts.sim.pole_step);
      if (!forward) std::reverse(iter.curve.begin(), iter.curve.end());
    }
    run.iterates.push_back(std::move(iter));
    const ShorteningIterate& cur = run.iterates.back();
    if (cur.residual < opts.tol) {
      run.stop_reason = "residual";
      break;
    }
    if (prev - cur.length < opts.tol) {
      run.stop_reason = "length";
      break;
    }
    prev = cur.length;
    g0 = tr.records.back().eta;
    tractor = trace_tractor(tr, true, Vec::Zero(g0.size()));
    forward = !forward;
  }
  return run;
}

ShorteningRun loop_repeated(const ManifoldModel& model, const std::vector<Vec>& loop, double ell,
                            const ShorteningOptions& opts) {
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole length must be positive");
  if (loop.size() < 4) throw Error(ErrorCode::InvalidArgument, "loop too short");
  if (ell > opts.injectivity)
    throw Error(ErrorCode::PoleTooLong, "pole length exceeds the injectivity bound");

  ShorteningRun run;
  run.mode = ShorteningMode::LoopRepeated;
  run.initial = loop;
  run.ell = ell;
  const Vec X = loop.front();
  Vec deck = loop.back() - X;
  const auto& per = model.period();
  for (int i = 0; i < static_cast<int>(deck.size()); ++i) {
    const double p = i < 2 && model.kind() == ModelKind::EmbeddedSurface ? per[i] : 0.0;
    if (p > 0.0) {
      const double m = std::round(deck[i] / p);
      if (std::abs(deck[i] - m * p) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "loop end is not a translate of its start");
      deck[i] = m * p;
      run.winding[i] = m;
    } else if (std::abs(deck[i]) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "loop is not closed");
    } else {
      deck[i] = 0.0;
    }
  }
  run.deck = deck;
  if (polyline_length(model, loop) <= ell)
    throw Error(ErrorCode::PoleTooLong, "loop is shorter than the pole");

  run.iterates.push_back({opts.keep_curves ? loop : std::vector<Vec>{},
                          polyline_length(model, loop),
                          polyline_geodesic_residual(model, loop, &deck)});
  if (run.iterates[0].residual < opts.tol) {
    run.stop_reason = "residual";
    return run;
  }

  const TractorCurve poly = TractorCurve::polyline(model, loop);
  const double ts = splice_parameter(model, poly, X, ell, opts.sim.pole_step);
  TractorCurve tractor = poly.restricted(ts, poly.t1());
  Vec g0 = X;
  double prev = run.iterates[0].length;
  run.stop_reason = "max_iter";
  for (int it = 1; it <= opts.max_iter; ++it) {
    const TractrixTrace tr = simulate(model, tractor, g0, ell, opts.sim);
    ShorteningIterate iter;
    iter.length = tractrix_length(tr) + ell;
    iter.residual = trace_residual(tr);
    if (opts.keep_curves) iter.curve = iterate_curve(tr, opts.sim.pole_step);
    run.iterates.push_back(std::move(iter));
    const ShorteningIterate& cur = run.iterates.back();
    if (cur.residual < opts.tol) {
      run.stop_reason = "residual";
      break;
    }
    if (prev - cur.length < opts.tol) {
      run.stop_reason = "length";
      break;
    }
    prev = cur.length;
    g0 = tr.records.back().gamma;
    tractor = trace_tractor(tr, false, deck);
  }
  return run;
}

}  // namespace tractrix
