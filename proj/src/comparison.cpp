#include "tractrix/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "tractrix/error.hpp"
#include "tractrix/functionals.hpp"

namespace tractrix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Check make_check(std::string name, std::string inequality, double lhs, double rhs, double margin) {
  Check c;
  c.name = std::move(name);
  c.inequality = std::move(inequality);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = margin;
  c.samples = 1;
  c.violations = margin < 0.0 ? 1 : 0;
  c.status = margin >= -kPassTolerance ? Check::Status::Pass : Check::Status::Fail;
  return c;
}

Check skipped(std::string name, std::string inequality, std::string note) {
  Check c;
  c.name = std::move(name);
  c.inequality = std::move(inequality);
  c.lhs = c.rhs = c.margin = std::numeric_limits<double>::quiet_NaN();
  c.status = Check::Status::Skipped;
  c.note = std::move(note);
  return c;
}

void require_bounds(const CurvatureBounds& b) {
  if (b.method == CurvatureBounds::Method::None)
    throw Error(ErrorCode::UncertifiedBounds, "curvature bounds were not certified");
  if (!(b.K_lo < b.K_hi) || !std::isfinite(b.K_lo) || !std::isfinite(b.K_hi))
    throw Error(ErrorCode::UncertifiedBounds, "curvature bounds need finite K_lo < K_hi");
}

// Trace points must lie in the certified region (coordinates with a period
// are not bounded).
void require_region(const TractrixTrace& trace, const CurvatureBounds& b) {
  const ManifoldModel& m = trace.model;
  if (m.kind() != ModelKind::EmbeddedSurface) return;
  const auto& per = m.period();
  auto inside = [&](const Vec& x) {
    const bool u_ok = per[0] > 0.0 || (x[0] >= b.region.u_min && x[0] <= b.region.u_max);
    const bool v_ok = per[1] > 0.0 || (x[1] >= b.region.v_min && x[1] <= b.region.v_max);
    return u_ok && v_ok;
  };
  for (const auto& r : trace.records)
    if (!inside(r.gamma) || !inside(r.eta))
      throw Error(ErrorCode::UncertifiedBounds, "trace leaves the certified region");
}

bool any_conjugate(const TractrixTrace& trace) {
  return std::any_of(trace.records.begin(), trace.records.end(),
                     [](const TraceRecord& r) { return r.conjugate_point; });
}

// Sampled inequality lhs(s) < rhs(s); margin and lhs/rhs at the worst sample.
struct Sweep {
  double worst = kInf;
  double lhs = 0.0;
  double rhs = 0.0;
  std::size_t n = 0;
  std::size_t bad = 0;

  void add(double l, double r, double margin) {
    ++n;
    if (margin < 0.0) ++bad;
    if (margin < worst) {
      worst = margin;
      lhs = l;
      rhs = r;
    }
  }
};

Check from_sweep(std::string name, std::string inequality, const Sweep& sw) {
  if (sw.n == 0) return skipped(std::move(name), std::move(inequality), "no admissible samples");
  Check c = make_check(std::move(name), std::move(inequality), sw.lhs, sw.rhs, sw.worst);
  c.samples = sw.n;
  c.violations = sw.bad;
  return c;
}

bool pull_sample(const TraceRecord& r) {
  return r.s > 0.0 && r.sigma == 1 && !r.singular && r.speed > 0.0;
}

}  // namespace

const char* to_string(CurvatureBounds::Method m) {
  switch (m) {
    case CurvatureBounds::Method::None: return "none";
    case CurvatureBounds::Method::Exact: return "exact";
    case CurvatureBounds::Method::Analytic: return "analytic";
    case CurvatureBounds::Method::Grid: return "grid";
  }
  return "?";
}

const char* to_string(Check::Status s) {
  switch (s) {
    case Check::Status::Pass: return "pass";
    case Check::Status::Fail: return "fail";
    case Check::Status::Skipped: return "skipped";
  }
  return "?";
}

std::size_t ComparisonReport::failures() const {
  return std::count_if(checks.begin(), checks.end(),
                       [](const Check& c) { return c.status == Check::Status::Fail; });
}

std::size_t ComparisonReport::passes() const {
  return std::count_if(checks.begin(), checks.end(),
                       [](const Check& c) { return c.status == Check::Status::Pass; });
}

void ComparisonReport::append(const ComparisonReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

Rect visited_region(const TractrixTrace& trace, double pole_step) {
  Rect r{kInf, -kInf, kInf, -kInf};
  auto grow = [&](const Vec& x) {
    r.u_min = std::min(r.u_min, x[0]);
    r.u_max = std::max(r.u_max, x[0]);
    r.v_min = std::min(r.v_min, x[1]);
    r.v_max = std::max(r.v_max, x[1]);
  };
  for (const auto& rec : trace.records) {
    grow(rec.gamma);
    grow(rec.eta);
    const PoleGeodesic pole =
        exp_map(trace.model, rec.gamma, rec.pole_dir, trace.ell, pole_step, {true, false});
    for (const auto& smp : pole.samples) grow(smp.x);
  }
  return r;
}

CurvatureBounds certify_bounds(const ManifoldModel& model, const Rect& region,
                               const CertifyOptions& opts, std::optional<double> user_lo,
                               std::optional<double> user_hi) {
  CurvatureBounds b;
  b.region = region;
  double lo, hi;
  if (model.kind() == ModelKind::SpaceForm) {
    lo = hi = model.curvature_K();
    b.method = CurvatureBounds::Method::Exact;
  } else if (auto range = model.chart()->curvature_range(region)) {
    lo = range->first;
    hi = range->second;
    b.method = CurvatureBounds::Method::Analytic;
  } else {
    std::tie(lo, hi) = sample_curvature_range(model, region, opts.grid, opts.exec);
    b.method = CurvatureBounds::Method::Grid;
  }
  b.sampled_lo = lo;
  b.sampled_hi = hi;
  double pad;
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi)))
    pad = opts.constant_pad;
  else if (b.method == CurvatureBounds::Method::Grid)
    pad = opts.grid_margin * std::max(hi - lo, std::max(std::abs(lo), std::abs(hi)));
  else
    pad = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  b.K_lo = lo - pad;
  b.K_hi = hi + pad;
  if (user_lo) {
    if (!(*user_lo < lo))
      throw Error(ErrorCode::UncertifiedBounds, "lower bound is not below the certified range");
    b.K_lo = *user_lo;
  }
  if (user_hi) {
    if (!(*user_hi > hi))
      throw Error(ErrorCode::UncertifiedBounds, "upper bound is not above the certified range");
    b.K_hi = *user_hi;
  }
  return b;
}

ComparisonReport rauch_length_area_check(const TractrixTrace& trace, const CurvatureBounds& bounds,
                                         const ComparisonOptions& opts) {
  require_bounds(bounds);
  require_region(trace, bounds);
  const double ell = trace.ell;
  const double L_gamma = tractrix_length(trace);
  const double L_eta = tractor_length_measured(trace);
  const double Kt = total_curvature(trace);
  const double area = sweep_area(trace);

  ComparisonReport rep;
  const char* n1 = "rauch_length_upper_curvature";
  const char* q1 = "L_eta >= sqrt(L_gamma^2 + (J_hi(ell) K_total)^2)";
  const char* n2 = "rauch_area_upper_curvature";
  const char* q2 = "area >= K_total * int_0^ell J_hi";
  const char* n3 = "rauch_length_lower_curvature";
  const char* q3 = "L_eta <= L_gamma + J_lo(ell) K_total";
  const char* n4 = "rauch_area_lower_curvature";
  const char* q4 = "area <= K_total * int_0^ell J_lo";

  if (ell > opts.pole_cap) {
    const std::string note = "pole longer than the configured cap";
    for (auto [n, q] : {std::pair{n1, q1}, {n2, q2}, {n3, q3}, {n4, q4}})
      rep.checks.push_back(skipped(n, q, note));
    return rep;
  }

  if (bounds.K_hi > 0.0 && !(std::sqrt(bounds.K_hi) * ell < M_PI)) {
    rep.checks.push_back(skipped(n1, q1, "sqrt(K_hi) ell >= pi"));
    rep.checks.push_back(skipped(n2, q2, "sqrt(K_hi) ell >= pi"));
  } else {
    const double J = jacobi_closed_form(bounds.K_hi, ell);
    const double I = jacobi_closed_form_integral(bounds.K_hi, ell);
    const double r1 = std::hypot(L_gamma, J * Kt);
    rep.checks.push_back(make_check(n1, q1, L_eta, r1, L_eta - r1));
    rep.checks.push_back(make_check(n2, q2, area, Kt * I, area - Kt * I));
  }

  if (any_conjugate(trace)) {
    rep.checks.push_back(skipped(n3, q3, "conjugate point along a pole"));
    rep.checks.push_back(skipped(n4, q4, "conjugate point along a pole"));
  } else {
    const double J = jacobi_closed_form(bounds.K_lo, ell);
    const double I = jacobi_closed_form_integral(bounds.K_lo, ell);
    const double r3 = L_gamma + J * Kt;
    rep.checks.push_back(make_check(n3, q3, L_eta, r3, r3 - L_eta));
    rep.checks.push_back(make_check(n4, q4, area, Kt * I, Kt * I - area));
  }
  return rep;
}

ComparisonReport rauch_jacobi_check(const ManifoldModel& model, const PoleGeodesic& pole,
                                    const CurvatureBounds& bounds) {
  require_bounds(bounds);
  const JacobiProfile prof = jacobi_scalar(model, pole);
  ComparisonReport rep;
  const char* q_hi = "j(u) >= J_hi(u) - 1e-6";
  const char* q_lo = "j(u) <= J_lo(u) + 1e-6";
  if (bounds.K_hi > 0.0 && !(std::sqrt(bounds.K_hi) * pole.length < M_PI)) {
    rep.checks.push_back(skipped("rauch_jacobi_upper_curvature", q_hi, "sqrt(K_hi) ell >= pi"));
  } else {
    Sweep sw;
    for (std::size_t i = 1; i < prof.u.size(); ++i) {  // j(0) = 0 on both sides
      const double ref = jacobi_closed_form(bounds.K_hi, prof.u[i]);
      sw.add(prof.j[i], ref, prof.j[i] - ref);
    }
    rep.checks.push_back(from_sweep("rauch_jacobi_upper_curvature", q_hi, sw));
  }
  if (prof.conjugate_point) {
    rep.checks.push_back(skipped("rauch_jacobi_lower_curvature", q_lo, "conjugate point"));
  } else {
    Sweep sw;
    for (std::size_t i = 1; i < prof.u.size(); ++i) {  // j(0) = 0 on both sides
      const double ref = jacobi_closed_form(bounds.K_lo, prof.u[i]);
      sw.add(prof.j[i], ref, ref - prof.j[i]);
    }
    rep.checks.push_back(from_sweep("rauch_jacobi_lower_curvature", q_lo, sw));
  }
  return rep;
}

ComparisonReport toponogov_sandwich_check(const TractrixTrace& trace,
                                          const SpaceFormSolution& sol_hi,
                                          const SpaceFormSolution& sol_lo,
                                          const ComparisonOptions& opts) {
  if (!trace.geodesic_tractor)
    throw Error(ErrorCode::HypothesisViolated, "distance comparison needs a geodesic tractor");
  if (trace.records.empty() || !trace.records.front().has_d)
    throw Error(ErrorCode::HypothesisViolated, "trace carries no distance data");
  const double d0 = trace.records.front().d;
  if (std::abs(sol_hi.d0 - d0) > 1e-6 || std::abs(sol_lo.d0 - d0) > 1e-6)
    throw Error(ErrorCode::InvalidArgument, "comparison solutions must share d(0) with the trace");
  if (!(sol_lo.K < sol_hi.K))
    throw Error(ErrorCode::InvalidArgument, "comparison solutions need K_lo < K_hi");

  const char* nd_hi = "toponogov_dist_upper_curvature";
  const char* qd_hi = "d_M(s) < d_hi(s)";
  const char* nk_hi = "toponogov_kappa_upper_curvature";
  const char* qk_hi = "kappa_M(s) < kappa_hi(s)";
  const char* nd_lo = "toponogov_dist_lower_curvature";
  const char* qd_lo = "d_M(s) > d_lo(s)";
  const char* nk_lo = "toponogov_kappa_lower_curvature";
  const char* qk_lo = "kappa_M(s) > kappa_lo(s)";

  ComparisonReport rep;
  std::string why;
  if (trace.ell > opts.pole_cap) why = "pole longer than the configured cap";
  if (any_conjugate(trace)) why = "conjugate point along a pole";
  if (!why.empty()) {
    for (auto [n, q] : {std::pair{nd_hi, qd_hi}, {nk_hi, qk_hi}, {nd_lo, qd_lo}, {nk_lo, qk_lo}})
      rep.checks.push_back(skipped(n, q, why));
    return rep;
  }

  Sweep dh, kh, dl, kl;
  for (const auto& r : trace.records) {
    if (!pull_sample(r) || !r.has_d) continue;
    const double s = r.s;
    const double d_hi = dist_at(sol_hi, s), d_lo = dist_at(sol_lo, s);
    dh.add(r.d, d_hi, d_hi - r.d);
    dl.add(r.d, d_lo, r.d - d_lo);
    if (r.kappa_masked || !std::isfinite(r.kappa)) continue;
    const double k_hi = kappa_at(sol_hi, s), k_lo = kappa_at(sol_lo, s);
    kh.add(r.kappa, k_hi, k_hi - r.kappa);
    kl.add(r.kappa, k_lo, r.kappa - k_lo);
  }
  rep.checks.push_back(from_sweep(nd_hi, qd_hi, dh));
  rep.checks.push_back(from_sweep(nk_hi, qk_hi, kh));
  rep.checks.push_back(from_sweep(nd_lo, qd_lo, dl));
  rep.checks.push_back(from_sweep(nk_lo, qk_lo, kl));
  return rep;
}

ComparisonReport toponogov_sandwich_check(const TractrixTrace& trace, const CurvatureBounds& bounds,
                                          const ComparisonOptions& opts) {
  require_bounds(bounds);
  require_region(trace, bounds);
  if (!trace.geodesic_tractor)
    throw Error(ErrorCode::HypothesisViolated, "distance comparison needs a geodesic tractor");
  if (trace.records.empty() || !trace.records.front().has_d)
    throw Error(ErrorCode::HypothesisViolated, "trace carries no distance data");
  const double d0 = trace.records.front().d;
  const double ell = trace.ell;
  if (bounds.K_hi > 0.0 && !(std::sqrt(bounds.K_hi) * ell < M_PI / 2)) {
    ComparisonReport rep;
    for (const char* n : {"toponogov_dist_upper_curvature", "toponogov_kappa_upper_curvature",
                          "toponogov_dist_lower_curvature", "toponogov_kappa_lower_curvature"})
      rep.checks.push_back(skipped(n, "", "sqrt(K_hi) ell >= pi/2"));
    return rep;
  }
  const SpaceFormSolution hi = solve_from_d0(bounds.K_hi, ell, d0);
  const SpaceFormSolution lo = solve_from_d0(bounds.K_lo, ell, d0);
  return toponogov_sandwich_check(trace, hi, lo, opts);
}

ComparisonReport le_sandwich_check(const TractrixTrace& trace, double ell,
                                   const CurvatureBounds& bounds) {
  require_bounds(bounds);
  if (bounds.K_hi > 0.0 && !(std::sqrt(bounds.K_hi) * ell < M_PI / 2))
    throw Error(ErrorCode::InvalidArgument, "leading exponent comparison needs sqrt(K_hi) ell < pi/2");
  std::vector<double> sd, fd, sk, fk;
  for (const auto& r : trace.records) {
    if (!pull_sample(r)) continue;
    if (r.has_d) {
      sd.push_back(r.s);
      fd.push_back(r.d);
    }
    if (!r.kappa_masked && std::isfinite(r.kappa)) {
      sk.push_back(r.s);
      fk.push_back(r.kappa);
    }
  }
  const double le_lo = leading_exponent(bounds.K_lo, ell);
  const double le_hi = leading_exponent(bounds.K_hi, ell);
  ComparisonReport rep;
  auto add = [&](const char* what, const std::vector<double>& s, const std::vector<double>& f) {
    const std::string n = std::string("le_") + what;
    if (s.empty()) {
      rep.checks.push_back(skipped(n + "_lower", "", "no samples"));
      rep.checks.push_back(skipped(n + "_upper", "", "no samples"));
      return;
    }
    const LeFit fit = leading_exponent_estimate(s, f);
    if (fit.low_confidence)
      throw Error(ErrorCode::LowConfidenceFit,
                  std::string("leading exponent fit of ") + what + " failed the quality gate");
    rep.checks.push_back(make_check(n + "_lower", std::string("Le(K_lo, ell) <= Le(") + what + ")",
                                    le_lo, fit.slope, fit.slope - le_lo));
    rep.checks.push_back(make_check(n + "_upper", std::string("Le(") + what + ") <= Le(K_hi, ell)",
                                    fit.slope, le_hi, le_hi - fit.slope));
  };
  add("dist", sd, fd);
  add("kappa", sk, fk);
  return rep;
}

}  // namespace tractrix
