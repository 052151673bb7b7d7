#include "tractrix/functionals.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "tractrix/error.hpp"
#include "tractrix/manifold.hpp"

namespace tractrix {

namespace {

enum class Panel { Regular, Crossing, Skip };

std::vector<Panel> panels(const TractrixTrace& trace, bool skip_stationary) {
  const auto& rec = trace.records;
  std::vector<Panel> p(rec.size() > 0 ? rec.size() - 1 : 0, Panel::Regular);
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    const TraceRecord &a = rec[i], &b = rec[i + 1];
    if (skip_stationary && a.singular && b.singular)
      p[i] = Panel::Skip;
    else if (a.speed * b.speed < 0.0)
      p[i] = Panel::Crossing;
  }
  return p;
}

// Integral of f over t. `crossing` integrates a sign-change panel.
double integrate_t(const TractrixTrace& trace, const std::function<double(const TraceRecord&)>& f,
                   const std::vector<Panel>& kind,
                   const std::function<double(const TraceRecord&, const TraceRecord&)>& crossing) {
  const auto& rec = trace.records;
  double total = 0.0;
  std::size_t i = 0;
  const std::size_t m = kind.size();
  std::vector<double> vals;
  while (i < m) {
    if (kind[i] == Panel::Skip) {
      ++i;
      continue;
    }
    if (kind[i] == Panel::Crossing) {
      total += crossing(rec[i], rec[i + 1]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < m && kind[j] == Panel::Regular) ++j;
    vals.clear();
    for (std::size_t k = i; k <= j; ++k) vals.push_back(f(rec[k]));
    const double h = (rec[j].t - rec[i].t) / static_cast<double>(j - i);
    total += simpson(vals, h);
    i = j;
  }
  return total;
}

double trapezoid_panel(const std::function<double(const TraceRecord&)>& f, const TraceRecord& a,
                       const TraceRecord& b) {
  return 0.5 * (f(a) + f(b)) * (b.t - a.t);
}

void require_jacobi(const TractrixTrace& trace) {
  if (trace.records.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "functionals need at least two records");
  for (const auto& r : trace.records)
    if (!std::isfinite(r.jacobi_ell) || !std::isfinite(r.jacobi_int))
      throw Error(ErrorCode::MissingJacobi, "trace records lack Jacobi data");
}

double integrate_simple(const TractrixTrace& trace,
                        const std::function<double(const TraceRecord&)>& f) {
  const auto kind = panels(trace, false);
  return integrate_t(trace, f, kind, [&](const TraceRecord& a, const TraceRecord& b) {
    return trapezoid_panel(f, a, b);
  });
}

}  // namespace

double tractrix_length(const TractrixTrace& trace) {
  if (trace.records.size() < 2) return 0.0;
  const auto kind = panels(trace, false);
  auto f = [](const TraceRecord& r) { return std::abs(r.speed); };
  // Split the crossing panel at the interpolated zero of ds/dt.
  return integrate_t(trace, f, kind, [](const TraceRecord& a, const TraceRecord& b) {
    const double tau = a.speed / (a.speed - b.speed);
    return 0.5 * (std::abs(a.speed) * tau + std::abs(b.speed) * (1.0 - tau)) * (b.t - a.t);
  });
}

double tractor_length(const TractrixTrace& trace) {
  require_jacobi(trace);
  return integrate_simple(trace, [](const TraceRecord& r) {
    return std::hypot(r.speed, r.omega * r.jacobi_ell);
  });
}

double tractor_length_measured(const TractrixTrace& trace) {
  if (trace.records.size() < 2) return 0.0;
  return integrate_simple(trace, [](const TraceRecord& r) { return r.eta_speed; });
}

double tractor_polyline_length(const TractrixTrace& trace) {
  const auto& rec = trace.records;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    const Vec d = rec[i + 1].eta - rec[i].eta;
    const Vec mid = 0.5 * (rec[i + 1].eta + rec[i].eta);
    total += trace.model.norm(mid, d);
  }
  return total;
}

double sweep_area(const TractrixTrace& trace) {
  require_jacobi(trace);
  return integrate_simple(trace, [](const TraceRecord& r) { return r.omega * r.jacobi_int; });
}

double total_curvature(const TractrixTrace& trace) {
  if (trace.records.size() < 2) return 0.0;
  const auto kind = panels(trace, true);
  auto f = [](const TraceRecord& r) { return r.omega; };
  double total = integrate_t(trace, f, kind, [&](const TraceRecord& a, const TraceRecord& b) {
    return trapezoid_panel(f, a, b);
  });
  for (const auto& c : trace.cusps) total += c.pole_rotation;
  return total;
}

double length_gap_bound(double L_gamma, std::span<const double> s, std::span<const double> kappa,
                        std::span<const double> jacobi_at_ell) {
  if (s.size() != kappa.size() || s.size() != jacobi_at_ell.size())
    throw Error(ErrorCode::InvalidArgument, "gap bound samples must share the s-grid");
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = kappa[i] * jacobi_at_ell[i], b = kappa[i + 1] * jacobi_at_ell[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    integral += 0.5 * (a + b) * (s[i + 1] - s[i]);
  }
  return std::hypot(L_gamma, integral) - L_gamma;
}

double length_gap_bound(const TractrixTrace& trace) {
  require_jacobi(trace);
  const double L = tractrix_length(trace);
  const double I =
      integrate_simple(trace, [](const TraceRecord& r) { return r.omega * r.jacobi_ell; });
  return std::hypot(L, I) - L;
}

LeFit leading_exponent_estimate(std::span<const double> s, std::span<const double> f) {
  if (s.size() != f.size() || s.empty())
    throw Error(ErrorCode::InvalidArgument, "leading exponent needs matching samples");
  double smin = s[0], smax = s[0];
  for (double x : s) {
    smin = std::min(smin, x);
    smax = std::max(smax, x);
  }
  const double cut = smin + 0.5 * (smax - smin);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < cut) continue;
    if (!(f[i] > 0.0)) throw Error(ErrorCode::NonPositiveSample, "non-positive sample in fit window");
    xs.push_back(s[i]);
    ys.push_back(std::log(f[i]));
  }
  LeFit fit;
  const std::size_t n = xs.size();
  fit.n = n;
  if (n < 2) {
    fit.low_confidence = true;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  // Centered sums avoid cancellation for nearly constant series.
  double vxx = 0.0, vxy = 0.0, vyy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    vxx += dx * dx;
    vxy += dx * dy;
    vyy += dy * dy;
  }
  vxx /= n;
  vxy /= n;
  vyy /= n;
  fit.slope = vxx > 0.0 ? vxy / vxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  // A constant series is fitted exactly by slope 0.
  const double scale = std::max(1.0, my * my);
  fit.r2 = vyy <= 1e-24 * scale ? 1.0 : (vxy * vxy) / (vxx * vyy);
  fit.low_confidence = n < 20 || !(fit.r2 > 0.999);
  return fit;
}

SweepResult compute_sweep(const TractrixTrace& trace) {
  SweepResult r;
  r.ell = trace.ell;
  r.L_gamma = tractrix_length(trace);
  r.L_eta = tractor_length(trace);
  r.K_total = total_curvature(trace);
  r.area = sweep_area(trace);
  r.gap_bound = length_gap_bound(trace);
  r.L_eta_measured = tractor_length_measured(trace);
  r.L_eta_polyline = tractor_polyline_length(trace);
  r.jacobi_at_ell.reserve(trace.records.size());
  for (const auto& rec : trace.records) r.jacobi_at_ell.push_back(rec.jacobi_ell);
  return r;
}

}  // namespace tractrix
