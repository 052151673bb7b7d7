#include "tractrix/charts.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tractrix/error.hpp"

namespace tractrix {

namespace {

struct Height {
  double f, fu, fv, fuu, fuv, fvv;
};

class GraphChart : public SurfaceChart {
 public:
  using HeightFn = std::function<Height(double, double)>;
  using RangeFn = std::function<std::optional<std::pair<double, double>>(const Rect&)>;

  GraphChart(std::string name, HeightFn h, RangeFn range = {})
      : name_(std::move(name)), h_(std::move(h)), range_(std::move(range)) {}

  std::string name() const override { return name_; }

  ChartJet jet(double u, double v) const override {
    const Height z = h_(u, v);
    ChartJet j;
    j.F = {u, v, z.f};
    j.Fu = {1.0, 0.0, z.fu};
    j.Fv = {0.0, 1.0, z.fv};
    j.Fuu = {0.0, 0.0, z.fuu};
    j.Fuv = {0.0, 0.0, z.fuv};
    j.Fvv = {0.0, 0.0, z.fvv};
    return j;
  }

  std::optional<std::pair<double, double>> curvature_range(const Rect& r) const override {
    if (range_) return range_(r);
    return std::nullopt;
  }

 private:
  std::string name_;
  HeightFn h_;
  RangeFn range_;
};

class EllipsoidChart : public SurfaceChart {
 public:
  EllipsoidChart(double a, double b, double c) : a_(a), b_(b), c_(c) {}

  std::string name() const override { return (a_ == b_ && b_ == c_) ? "sphere" : "ellipsoid"; }

  ChartJet jet(double u, double v) const override {
    const double su = std::sin(u), cu = std::cos(u), sv = std::sin(v), cv = std::cos(v);
    ChartJet j;
    j.F = {a_ * su * cv, b_ * su * sv, c_ * cu};
    j.Fu = {a_ * cu * cv, b_ * cu * sv, -c_ * su};
    j.Fv = {-a_ * su * sv, b_ * su * cv, 0.0};
    j.Fuu = {-a_ * su * cv, -b_ * su * sv, -c_ * cu};
    j.Fuv = {-a_ * cu * sv, b_ * cu * cv, 0.0};
    j.Fvv = {-a_ * su * cv, -b_ * su * sv, 0.0};
    return j;
  }

  // Extremes of the Gauss curvature sit at the axis points.
  std::optional<std::pair<double, double>> curvature_range(const Rect&) const override {
    const double a2 = a_ * a_, b2 = b_ * b_, c2 = c_ * c_;
    const double k[3] = {a2 / (b2 * c2), b2 / (a2 * c2), c2 / (a2 * b2)};
    return std::make_pair(*std::min_element(k, k + 3), *std::max_element(k, k + 3));
  }

 private:
  double a_, b_, c_;
};

class PseudosphereChart : public SurfaceChart {
 public:
  std::string name() const override { return "pseudosphere"; }

  ChartJet jet(double u, double v) const override {
    const double s = 1.0 / std::cosh(u), t = std::tanh(u);
    const double sv = std::sin(v), cv = std::cos(v);
    const double st = s * t;
    const double dst = s * (s * s - t * t);
    ChartJet j;
    j.F = {s * cv, s * sv, u - t};
    j.Fu = {-st * cv, -st * sv, t * t};
    j.Fv = {-s * sv, s * cv, 0.0};
    j.Fuu = {-dst * cv, -dst * sv, 2.0 * t * s * s};
    j.Fuv = {st * sv, -st * cv, 0.0};
    j.Fvv = {-s * cv, -s * sv, 0.0};
    return j;
  }

  std::optional<std::pair<double, double>> curvature_range(const Rect&) const override {
    return std::make_pair(-1.0, -1.0);
  }
};

class CylinderChart : public SurfaceChart {
 public:
  explicit CylinderChart(double r) : r_(r) {}

  std::string name() const override { return "cylinder"; }

  ChartJet jet(double u, double v) const override {
    const double su = std::sin(u), cu = std::cos(u);
    ChartJet j;
    j.F = {r_ * cu, r_ * su, v};
    j.Fu = {-r_ * su, r_ * cu, 0.0};
    j.Fv = {0.0, 0.0, 1.0};
    j.Fuu = {-r_ * cu, -r_ * su, 0.0};
    j.Fuv = Eigen::Vector3d::Zero();
    j.Fvv = Eigen::Vector3d::Zero();
    return j;
  }

  std::optional<std::pair<double, double>> curvature_range(const Rect&) const override {
    return std::make_pair(0.0, 0.0);
  }

 private:
  double r_;
};

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

double param(const std::map<std::string, double>& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}

}  // namespace

std::shared_ptr<const SurfaceChart> make_plane() {
  return std::make_shared<GraphChart>(
      "plane", [](double, double) { return Height{0, 0, 0, 0, 0, 0}; },
      [](const Rect&) { return std::make_optional(std::make_pair(0.0, 0.0)); });
}

std::shared_ptr<const SurfaceChart> make_sphere(double r) {
  require_positive(r, "sphere radius");
  return std::make_shared<EllipsoidChart>(r, r, r);
}

std::shared_ptr<const SurfaceChart> make_ellipsoid(double a, double b, double c) {
  require_positive(a, "ellipsoid axis a");
  require_positive(b, "ellipsoid axis b");
  require_positive(c, "ellipsoid axis c");
  return std::make_shared<EllipsoidChart>(a, b, c);
}

std::shared_ptr<const SurfaceChart> make_pseudosphere() {
  return std::make_shared<PseudosphereChart>();
}

std::shared_ptr<const SurfaceChart> make_paraboloid(double a) {
  require_positive(a, "paraboloid coefficient");
  auto h = [a](double u, double v) {
    return Height{a * (u * u + v * v), 2 * a * u, 2 * a * v, 2 * a, 0.0, 2 * a};
  };
  // K = 4a^2 / (1 + 4a^2 r^2)^2 decreases with r.
  auto range = [a](const Rect& r) {
    const double du = std::max({r.u_min, 0.0, -r.u_max});
    const double dv = std::max({r.v_min, 0.0, -r.v_max});
    const double rmin2 = du * du + dv * dv;
    const double cu = std::max(std::abs(r.u_min), std::abs(r.u_max));
    const double cv = std::max(std::abs(r.v_min), std::abs(r.v_max));
    const double rmax2 = cu * cu + cv * cv;
    auto K = [a](double r2) {
      const double q = 1.0 + 4.0 * a * a * r2;
      return 4.0 * a * a / (q * q);
    };
    return std::make_optional(std::make_pair(K(rmax2), K(rmin2)));
  };
  return std::make_shared<GraphChart>("paraboloid", h, range);
}

std::shared_ptr<const SurfaceChart> make_hilly(double A, double omega) {
  require_positive(omega, "hilly frequency");
  auto h = [A, omega](double u, double v) {
    const double su = std::sin(omega * u), cu = std::cos(omega * u);
    const double sv = std::sin(omega * v), cv = std::cos(omega * v);
    const double w2 = omega * omega;
    return Height{A * su * sv,        A * omega * cu * sv, A * omega * su * cv,
                  -A * w2 * su * sv, A * w2 * cu * cv,    -A * w2 * su * sv};
  };
  return std::make_shared<GraphChart>("hilly", h);
}

std::shared_ptr<const SurfaceChart> make_cylinder(double r) {
  require_positive(r, "cylinder radius");
  return std::make_shared<CylinderChart>(r);
}

std::shared_ptr<const SurfaceChart> make_graph(std::vector<GraphTerm> terms) {
  auto h = [terms = std::move(terms)](double u, double v) {
    Height z{0, 0, 0, 0, 0, 0};
    for (const auto& t : terms) {
      if (t.type == GraphTerm::Type::Poly) {
        const int p = t.pu, q = t.pv;
        const double up = ipow(u, p), vq = ipow(v, q);
        z.f += t.c * up * vq;
        if (p >= 1) z.fu += t.c * p * ipow(u, p - 1) * vq;
        if (q >= 1) z.fv += t.c * q * up * ipow(v, q - 1);
        if (p >= 2) z.fuu += t.c * p * (p - 1) * ipow(u, p - 2) * vq;
        if (p >= 1 && q >= 1) z.fuv += t.c * p * q * ipow(u, p - 1) * ipow(v, q - 1);
        if (q >= 2) z.fvv += t.c * q * (q - 1) * up * ipow(v, q - 2);
      } else {
        const double arg = t.a * u + t.b * v;
        // s0 = value, s1 = derivative of the base function at arg.
        const bool is_sin = t.type == GraphTerm::Type::Sin;
        const double s0 = is_sin ? std::sin(arg) : std::cos(arg);
        const double s1 = is_sin ? std::cos(arg) : -std::sin(arg);
        z.f += t.c * s0;
        z.fu += t.c * t.a * s1;
        z.fv += t.c * t.b * s1;
        z.fuu -= t.c * t.a * t.a * s0;
        z.fuv -= t.c * t.a * t.b * s0;
        z.fvv -= t.c * t.b * t.b * s0;
      }
    }
    return z;
  };
  return std::make_shared<GraphChart>("graph", h);
}

ManifoldModel make_catalog_surface(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   const std::vector<GraphTerm>& terms,
                                   std::optional<Rect> domain) {
  const double kTwoPi = 2.0 * M_PI;
  std::shared_ptr<const SurfaceChart> chart;
  Rect def;
  std::array<double, 2> period{0.0, 0.0};
  if (name == "plane") {
    chart = make_plane();
    def = {-1e3, 1e3, -1e3, 1e3};
  } else if (name == "flat_torus") {
    const double Lx = param(params, "Lx", 1.0), Ly = param(params, "Ly", 1.0);
    require_positive(Lx, "torus period Lx");
    require_positive(Ly, "torus period Ly");
    chart = make_plane();
    def = {0.0, Lx, 0.0, Ly};
    period = {Lx, Ly};
  } else if (name == "sphere") {
    chart = make_sphere(param(params, "r", 1.0));
    def = {1e-3, M_PI - 1e-3, -kTwoPi, kTwoPi};
    period = {0.0, kTwoPi};
  } else if (name == "ellipsoid") {
    chart = make_ellipsoid(param(params, "a", 1.0), param(params, "b", 1.0), param(params, "c", 1.0));
    def = {1e-3, M_PI - 1e-3, -kTwoPi, kTwoPi};
    period = {0.0, kTwoPi};
  } else if (name == "pseudosphere") {
    chart = make_pseudosphere();
    def = {0.1, 10.0, -kTwoPi, kTwoPi};
    period = {0.0, kTwoPi};
  } else if (name == "paraboloid") {
    chart = make_paraboloid(param(params, "a", 1.0));
    def = {-10.0, 10.0, -10.0, 10.0};
  } else if (name == "hilly") {
    chart = make_hilly(param(params, "A", 0.5), param(params, "omega", 1.0));
    def = {-20.0, 20.0, -20.0, 20.0};
  } else if (name == "cylinder") {
    chart = make_cylinder(param(params, "r", 1.0));
    def = {0.0, kTwoPi, -100.0, 100.0};
    period = {kTwoPi, 0.0};
  } else if (name == "graph") {
    if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "graph chart needs terms");
    chart = make_graph(terms);
    def = {-10.0, 10.0, -10.0, 10.0};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown chart '" + name + "'");
  }
  return ManifoldModel::surface(chart, domain.value_or(def), period);
}

}  // namespace tractrix
