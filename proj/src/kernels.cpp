#include "tractrix/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "tractrix/error.hpp"
#include "tractrix/simulate.hpp"

namespace tractrix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaskBand = 1e-4;

void annotate_one(const ManifoldModel& model, const TractorCurve& tractor, double ell,
                  double pole_step, int foot_steps, double eps, bool want_d, TraceRecord& r) {
  const PoleGeodesic pole = exp_map(model, r.gamma, r.pole_dir, ell, pole_step, {true, true});
  std::vector<double> js;
  js.reserve(pole.samples.size());
  r.conjugate_point = false;
  for (const auto& smp : pole.samples) {
    js.push_back(smp.jacobi);
    if (smp.u > 0.0 && smp.jacobi <= 0.0) r.conjugate_point = true;
  }
  r.jacobi_ell = js.back();
  r.jacobi_int = simpson(js, pole.step);

  const CurvePoint e = tractor.at(r.t);
  const Vec T = pole.end_tangent() / model.norm(pole.endpoint(), pole.end_tangent());
  r.pole_end_tangent = T;
  r.eta_prime = e.dx;
  r.speed = model.inner(e.x, e.dx, T);
  r.eta_speed = model.norm(e.x, e.dx);
  r.omega = model.norm(e.x, e.dx - r.speed * T) / r.jacobi_ell;
  r.singular = std::abs(r.speed) <= eps * r.eta_speed || r.eta_speed == 0.0;
  r.kappa = r.singular ? kInf : r.omega / std::abs(r.speed);

  r.has_d = false;
  r.kappa_masked = false;
  if (want_d) {
    const Foot f = project_to_geodesic(model, tractor, r.gamma, r.t, foot_steps);
    r.d = f.d;
    r.has_d = true;
    r.kappa_masked = std::abs(r.d - ell) < kMaskBand;
  }
}

// Covariant derivative of the unit tangent by a 3-point stencil in s, with
// the neighbouring tangents transported to gamma_i.
void curvature_fd(const ManifoldModel& model, const std::vector<TraceRecord>& rec, std::size_t i,
                  double& out) {
  out = std::numeric_limits<double>::quiet_NaN();
  if (i == 0 || i + 1 >= rec.size()) return;
  const TraceRecord &a = rec[i - 1], &b = rec[i], &c = rec[i + 1];
  if (a.singular || b.singular || c.singular) return;
  if (a.sigma != b.sigma || b.sigma != c.sigma) return;
  const double hm = b.s - a.s, hp = c.s - b.s;
  if (!(hm > 1e-12) || !(hp > 1e-12)) return;
  const double sg = b.sigma;
  const Vec Ta = sg * a.pole_dir, Tb = sg * b.pole_dir, Tc = sg * c.pole_dir;
  const Vec pa[2] = {a.gamma, b.gamma};
  const Vec pc[2] = {c.gamma, b.gamma};
  const Vec Pa = parallel_transport(model, pa, Ta, 4);
  const Vec Pc = parallel_transport(model, pc, Tc, 4);
  const Vec D = (-hp * hp * Pa + (hp * hp - hm * hm) * Tb + hm * hm * Pc) / (hm * hp * (hm + hp));
  out = model.norm(b.gamma, D);
}

template <bool Parallel>
void annotate_impl(const TractorCurve& tractor, TractrixTrace& trace, double pole_step,
                   double eps) {
  auto& rec = trace.records;
  const ManifoldModel& model = trace.model;
  const double ell = trace.ell;
  const bool want_d = trace.geodesic_tractor;
  const int foot_steps = pole_steps(ell, pole_step);
  const long n = static_cast<long>(rec.size());
  std::exception_ptr err;

#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (long i = 0; i < n; ++i) {
    try {
      annotate_one(model, tractor, ell, pole_step, foot_steps, eps, want_d, rec[i]);
    } catch (...) {
#pragma omp critical(tractrix_annotate_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  // Provisional signs for the stencil; mark_cusps settles them afterwards.
  int sign = 1;
  for (auto& r : rec) {
    if (!r.singular) sign = r.speed > 0.0 ? 1 : -1;
    r.sigma = sign;
  }

  std::vector<double> fd(n);
#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (long i = 0; i < n; ++i) {
    try {
      curvature_fd(model, rec, static_cast<std::size_t>(i), fd[i]);
    } catch (...) {
      fd[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  for (long i = 0; i < n; ++i) rec[i].kappa_fd = fd[i];
}

}  // namespace

void annotate_records_serial(const TractorCurve& tractor, TractrixTrace& trace, double pole_step,
                             double cusp_eps) {
  annotate_impl<false>(tractor, trace, pole_step, cusp_eps);
}

void annotate_records_parallel(const TractorCurve& tractor, TractrixTrace& trace,
                               double pole_step, double cusp_eps) {
  annotate_impl<true>(tractor, trace, pole_step, cusp_eps);
}

void annotate_records(const TractorCurve& tractor, TractrixTrace& trace, double pole_step,
                      double cusp_eps, Exec exec) {
  if (exec == Exec::Parallel)
    annotate_records_parallel(tractor, trace, pole_step, cusp_eps);
  else
    annotate_records_serial(tractor, trace, pole_step, cusp_eps);
}

std::pair<double, double> sample_curvature_range(const ManifoldModel& model, const Rect& r, int n,
                                                 Exec exec) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points per side");
  double lo = kInf, hi = -kInf;
  std::exception_ptr err;
  const bool par = exec == Exec::Parallel;
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static) if (par)
  for (int i = 0; i < n; ++i) {
    const double u = r.u_min + (r.u_max - r.u_min) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double v = r.v_min + (r.v_max - r.v_min) * j / (n - 1);
      try {
        const double K = model.gauss_curvature_at(vec2(u, v));
        lo = std::min(lo, K);
        hi = std::max(hi, K);
      } catch (...) {
#pragma omp critical(tractrix_grid_error)
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  return {lo, hi};
}

std::vector<SpaceFormRow> spaceform_table(const SpaceFormSolution& sol, std::span<const double> s,
                                          Exec exec) {
  const long n = static_cast<long>(s.size());
  std::vector<SpaceFormRow> out(n);
  std::exception_ptr err;
  const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = {s[i], dist_at(sol, s[i]), kappa_at(sol, s[i])};
    } catch (...) {
#pragma omp critical(tractrix_table_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace tractrix
