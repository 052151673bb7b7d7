#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tractrix/manifold.hpp"

namespace tractrix {

// One term of a custom graph z = f(u, v):
//   poly: c * u^pu * v^pv
//   sin/cos: c * sin(a u + b v), c * cos(a u + b v)
struct GraphTerm {
  enum class Type { Poly, Sin, Cos };
  Type type = Type::Poly;
  double c = 0.0;
  int pu = 0;
  int pv = 0;
  double a = 0.0;
  double b = 0.0;
  bool operator==(const GraphTerm&) const = default;
};

std::shared_ptr<const SurfaceChart> make_plane();
std::shared_ptr<const SurfaceChart> make_sphere(double r);
std::shared_ptr<const SurfaceChart> make_ellipsoid(double a, double b, double c);
// (sech u cos v, sech u sin v, u - tanh u), K = -1.
std::shared_ptr<const SurfaceChart> make_pseudosphere();
// z = a (u^2 + v^2)
std::shared_ptr<const SurfaceChart> make_paraboloid(double a);
// z = A sin(w u) sin(w v)
std::shared_ptr<const SurfaceChart> make_hilly(double A, double omega);
// (r cos u, r sin u, v)
std::shared_ptr<const SurfaceChart> make_cylinder(double r);
std::shared_ptr<const SurfaceChart> make_graph(std::vector<GraphTerm> terms);

// Catalog names: plane, flat_torus(Lx, Ly), sphere(r), ellipsoid(a, b, c),
// pseudosphere, paraboloid(a), hilly(A, omega), cylinder(r), graph.
// Missing parameters take catalog defaults; `domain` overrides the default
// chart rectangle.
ManifoldModel make_catalog_surface(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   const std::vector<GraphTerm>& terms = {},
                                   std::optional<Rect> domain = std::nullopt);

}  // namespace tractrix
