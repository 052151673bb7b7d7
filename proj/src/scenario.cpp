#include "tractrix/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tractrix/functionals.hpp"
#include "tractrix/io.hpp"
#include "tractrix/kernels.hpp"
#include "tractrix/simulate.hpp"
#include "tractrix/spaceform.hpp"

namespace tractrix {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::set<std::string> kCommands{"simulate", "analytic", "shorten", "verify"};
const std::set<std::string> kCharts{"plane",      "flat_torus", "sphere",   "ellipsoid", "pseudosphere",
                                    "paraboloid", "hilly",      "cylinder", "graph"};
const std::set<std::string> kChecks{"rauch_length_area", "rauch_jacobi", "toponogov", "le"};

// Keys each tractor type reads besides "type" and "reverse".
const std::map<std::string, std::vector<std::string>> kTractorKeys{
    {"line", {"t0", "t1", "origin", "direction"}},
    {"geodesic", {"t0", "t1", "origin", "direction"}},
    {"equator", {"t0", "t1", "phi0"}},
    {"latitude", {"t0", "t1", "theta", "phi0"}},
    {"disk_diameter", {"t0", "t1", "angle"}},
    {"circle", {"t0", "t1", "origin", "radius", "omega"}},
    {"helix", {"t0", "t1", "origin", "radius", "omega", "pitch"}},
    {"fourier", {"t0", "t1", "fourier", "geodesic"}},
    {"polyline", {"file", "closed"}},
    {"tractrix", {"file"}},
    {"from_tractrix", {"curve", "sign"}},
};

bool has_key(const std::string& type, const std::string& key) {
  const auto& keys = kTractorKeys.at(type);
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

// "1.5", "pi", "-3*pi/4", "pi/8", "inf"
bool parse_expr(std::string s, double& out) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) return false;
  double sign = 1.0;
  if (s[0] == '-' || s[0] == '+') {
    if (s[0] == '-') sign = -1.0;
    s.erase(0, 1);
  }
  auto num = [](std::string_view v, double& x) {
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    return !v.empty() && r.ec == std::errc() && r.ptr == v.data() + v.size();
  };
  if (s == "inf") {
    out = sign * kInf;
    return true;
  }
  std::string_view v(s);
  double den = 1.0;
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    if (!num(v.substr(slash + 1), den) || den == 0.0) return false;
    v = v.substr(0, slash);
  }
  double val = 0.0;
  if (v == "pi") {
    val = M_PI;
  } else if (v.size() > 3 && v.substr(v.size() - 3) == "*pi") {
    if (!num(v.substr(0, v.size() - 3), val)) return false;
    val *= M_PI;
  } else if (!num(v, val)) {
    return false;
  }
  out = sign * val / den;
  return true;
}

std::size_t line_of(const std::string& text, std::size_t pos) {
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(pos, text.size()), '\n')) + 1;
}

struct Source {
  const std::string* text;
  std::string origin;
};

// Walks one JSON object, records the keys read and reports errors with the
// dotted field path and the line of the offending key.
class Reader {
 public:
  Reader(const json& j, std::string path, const Source& src, std::vector<std::string> keys)
      : j_(j), path_(std::move(path)), src_(src), keys_(std::move(keys)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::vector<std::string> keys = keys_;
    if (!key.empty()) keys.push_back(key);
    std::size_t pos = 0;
    for (const auto& k : keys) {
      const auto at = src_.text->find("\"" + k + "\"", pos);
      if (at == std::string::npos) break;
      pos = at;
    }
    std::string field = path_;
    if (!key.empty()) field += (field.empty() ? "" : ".") + key;
    throw Error(ErrorCode::Config, src_.origin + ":" + std::to_string(line_of(*src_.text, pos)) +
                                       ": " + (field.empty() ? "<root>" : field) + ": " + msg);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    out = to_double(key, at(key));
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    if (at(key).is_null()) {
      out.reset();
      return;
    }
    out = to_double(key, at(key));
  }
  void get(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      fail(key, "integer out of range");
    out = static_cast<int>(x);
  }
  void get(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    out = v.get<std::size_t>();
  }
  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    out = v.get<bool>();
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    out.clear();
    for (const auto& x : v) out.push_back(to_double(key, x));
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of strings");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_string()) fail(key, "expected an array of strings");
      out.push_back(x.get<std::string>());
    }
  }
  void get(const std::string& key, std::map<std::string, double>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_object()) fail(key, "expected an object of numbers");
    out.clear();
    for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = to_double(key, it.value());
  }

  Reader child(const std::string& key) {
    std::vector<std::string> keys = keys_;
    keys.push_back(key);
    return Reader(at(key), path_.empty() ? key : path_ + "." + key, src_, keys);
  }
  // Objects of an array; the path gets the index.
  std::vector<Reader> children(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of objects");
    std::vector<Reader> out;
    std::vector<std::string> keys = keys_;
    keys.push_back(key);
    for (std::size_t i = 0; i < v.size(); ++i)
      out.emplace_back(v[i], (path_.empty() ? key : path_ + "." + key) + "[" + std::to_string(i) + "]",
                       src_, keys);
    return out;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
  }

  void mark(const std::string& key) { seen_.insert(key); }
  const std::string& path() const { return path_; }

 private:
  double to_double(const std::string& key, const json& v) const {
    if (v.is_number()) return v.get<double>();
    double x = 0.0;
    if (v.is_string() && parse_expr(v.get<std::string>(), x)) return x;
    fail(key, "expected a number (or an expression like \"3*pi/4\")");
  }

  const json& j_;
  std::string path_;
  Source src_;
  std::vector<std::string> keys_;
  std::set<std::string> seen_;
};

void require(bool ok, Reader& r, const std::string& key, const std::string& msg) {
  if (!ok) r.fail(key, msg);
}

fs::path resolve(const fs::path& base, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

ModelSpec read_model(Reader r) {
  ModelSpec m;
  r.get("kind", m.kind);
  if (m.kind == "space_form") {
    r.get("dimension", m.dimension);
    r.get("K", m.K);
    require(m.dimension == 2 || m.dimension == 3, r, "dimension", "must be 2 or 3");
    require(std::isfinite(m.K), r, "K", "must be finite");
    require(m.dimension == 2 || m.K == 0.0, r, "dimension", "dimension 3 needs K = 0");
  } else if (m.kind == "surface") {
    r.get("chart", m.chart);
    require(kCharts.count(m.chart) > 0, r, "chart", "unknown chart '" + m.chart + "'");
    r.get("params", m.params);
    if (r.has("terms")) {
      for (Reader t : r.children("terms")) {
        GraphTerm g;
        std::string type = "poly";
        t.get("type", type);
        t.get("c", g.c);
        if (type == "poly") {
          g.type = GraphTerm::Type::Poly;
          t.get("pu", g.pu);
          t.get("pv", g.pv);
          require(g.pu >= 0 && g.pv >= 0, t, "pu", "exponents must be non-negative");
        } else if (type == "sin" || type == "cos") {
          g.type = type == "sin" ? GraphTerm::Type::Sin : GraphTerm::Type::Cos;
          t.get("a", g.a);
          t.get("b", g.b);
        } else {
          t.fail("type", "expected poly, sin or cos");
        }
        t.done();
        m.terms.push_back(g);
      }
    }
    require(m.chart != "graph" || !m.terms.empty(), r, "terms", "graph chart needs terms");
    if (r.has("domain")) {
      Reader d = r.child("domain");
      Rect rect;
      d.get("u_min", rect.u_min);
      d.get("u_max", rect.u_max);
      d.get("v_min", rect.v_min);
      d.get("v_max", rect.v_max);
      require(rect.u_min < rect.u_max && rect.v_min < rect.v_max, d, "", "empty domain");
      d.done();
      m.domain = rect;
    }
  } else {
    r.fail("kind", "expected space_form or surface");
  }
  r.done();
  return m;
}

FourierCurve read_fourier(Reader r) {
  FourierCurve c;
  r.get("omega", c.omega);
  if (!r.has("coords")) r.fail("coords", "missing");
  for (Reader k : r.children("coords")) {
    FourierCoord fc;
    k.get("c0", fc.c0);
    k.get("lin", fc.lin);
    if (k.has("terms")) {
      const json& terms = k.at("terms");
      if (!terms.is_array()) k.fail("terms", "expected an array of [n, a, b]");
      for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() ||
            !t[2].is_number())
          k.fail("terms", "expected an array of [n, a, b]");
        fc.terms.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
      }
    }
    k.done();
    c.coords.push_back(fc);
  }
  require(c.coords.size() == 2 || c.coords.size() == 3, r, "coords", "need 2 or 3 coordinates");
  r.done();
  return c;
}

TractorSpec read_tractor(Reader r, const fs::path& base) {
  TractorSpec t;
  r.get("type", t.type);
  if (!kTractorKeys.count(t.type)) r.fail("type", "unknown tractor type '" + t.type + "'");
  r.get("reverse", t.reverse);
  auto use = [&](const char* key) { return has_key(t.type, key); };
  if (use("t0")) {
    r.get("t0", t.t0);
    r.get("t1", t.t1);
    require(t.t1 > t.t0, r, "t1", "must exceed t0");
  }
  if (use("origin")) r.get("origin", t.origin);
  if (use("direction")) r.get("direction", t.direction);
  if (use("radius")) {
    r.get("radius", t.radius);
    require(t.radius > 0.0, r, "radius", "must be positive");
  }
  if (use("omega")) {
    r.get("omega", t.omega);
    require(t.omega != 0.0, r, "omega", "must be non-zero");
  }
  if (use("pitch")) r.get("pitch", t.pitch);
  if (use("theta")) {
    r.get("theta", t.theta);
    require(t.theta > 0.0 && t.theta < M_PI, r, "theta", "colatitude must lie in (0, pi)");
  }
  if (use("phi0")) r.get("phi0", t.phi0);
  if (use("angle")) r.get("angle", t.angle);
  if (use("fourier")) {
    if (!r.has("fourier")) r.fail("fourier", "missing");
    t.fourier = read_fourier(r.child("fourier"));
  }
  if (use("geodesic")) r.get("geodesic", t.geodesic);
  if (use("file")) {
    r.get("file", t.file);
    require(!t.file.empty(), r, "file", "missing");
    require(fs::exists(resolve(base, t.file)), r, "file", "no such file '" + t.file + "'");
  }
  if (use("closed")) r.get("closed", t.closed);
  if (use("sign")) {
    r.get("sign", t.sign);
    require(t.sign == 1 || t.sign == -1, r, "sign", "must be +1 or -1");
  }
  if (use("curve")) {
    if (!r.has("curve")) r.fail("curve", "missing");
    t.curve.push_back(read_tractor(r.child("curve"), base));
  }
  if (t.type == "line" || t.type == "geodesic") {
    require(!t.origin.empty(), r, "origin", "missing");
    require(t.direction.size() == t.origin.size(), r, "direction", "needs one value per coordinate");
  }
  r.done();
  return t;
}

Gamma0Spec read_gamma0(Reader r) {
  Gamma0Spec g;
  r.get("mode", g.mode);
  if (g.mode == "explicit") {
    r.get("point", g.point);
    require(g.point.size() == 2 || g.point.size() == 3, r, "point", "needs 2 or 3 values");
  } else if (g.mode == "offset") {
    r.get("d0", g.d0);
    r.get("side", g.side);
    require(g.d0 >= 0.0, r, "d0", "must be non-negative");
    require(g.side == 1 || g.side == -1, r, "side", "must be +1 or -1");
  } else if (g.mode != "behind") {
    r.fail("mode", "expected explicit, offset or behind");
  }
  r.done();
  return g;
}

SimParams read_sim(Reader r) {
  SimParams p;
  r.get("dt", p.dt);
  r.get("pole_step", p.pole_step);
  r.get("cusp_speed_eps", p.cusp_speed_eps);
  r.get("max_records", p.max_records);
  r.get("force_shooting", p.force_shooting);
  r.get("parallel", p.parallel);
  require(p.dt > 0.0, r, "dt", "must be positive");
  require(p.pole_step >= 0.0, r, "pole_step", "must be non-negative");
  require(p.cusp_speed_eps > 0.0 && p.cusp_speed_eps < 1e-2, r, "cusp_speed_eps",
          "must lie in (0, 1e-2)");
  require(p.max_records > 1, r, "max_records", "must exceed 1");
  r.done();
  return p;
}

ComparisonSpec read_comparison(Reader r) {
  ComparisonSpec c;
  r.get("enabled", c.enabled);
  r.get("K_lo", c.K_lo);
  r.get("K_hi", c.K_hi);
  r.get("pole_cap", c.pole_cap);
  r.get("checks", c.checks);
  r.get("jacobi_poles", c.jacobi_poles);
  r.get("constant_pad", c.constant_pad);
  r.get("grid_margin", c.grid_margin);
  r.get("grid", c.grid);
  if (c.K_lo && c.K_hi) require(*c.K_lo < *c.K_hi, r, "K_hi", "must exceed K_lo");
  require(c.pole_cap > 0.0, r, "pole_cap", "must be positive");
  for (const auto& n : c.checks) require(kChecks.count(n) > 0, r, "checks", "unknown check '" + n + "'");
  require(c.jacobi_poles >= 0, r, "jacobi_poles", "must be non-negative");
  require(c.constant_pad > 0.0, r, "constant_pad", "must be positive");
  require(c.grid_margin >= 0.0, r, "grid_margin", "must be non-negative");
  require(c.grid >= 2, r, "grid", "must be at least 2");
  r.done();
  return c;
}

AnalyticSpec read_analytic(Reader r) {
  AnalyticSpec a;
  r.get("K", a.K);
  r.get("ell", a.ell);
  r.get("d0", a.d0);
  r.get("s_max", a.s_max);
  r.get("samples", a.samples);
  r.get("long_pole", a.long_pole);
  if (r.has("le")) {
    const json& v = r.at("le");
    if (!v.is_array()) r.fail("le", "expected an array of [K, ell]");
    for (const auto& p : v) {
      double K = 0.0, ell = 0.0;
      if (!p.is_array() || p.size() != 2) r.fail("le", "expected an array of [K, ell]");
      for (int i = 0; i < 2; ++i) {
        double& x = i == 0 ? K : ell;
        if (p[i].is_number())
          x = p[i].get<double>();
        else if (!(p[i].is_string() && parse_expr(p[i].get<std::string>(), x)))
          r.fail("le", "expected numbers");
      }
      require(ell > 0.0, r, "le", "pole lengths must be positive");
      a.le.push_back({K, ell});
    }
  }
  require(a.ell > 0.0, r, "ell", "must be positive");
  require(a.s_max > 0.0, r, "s_max", "must be positive");
  require(a.samples >= 2, r, "samples", "must be at least 2");
  r.done();
  return a;
}

ShortenSpec read_shorten(Reader r, const fs::path& base) {
  ShortenSpec s;
  r.get("mode", s.mode);
  r.get("tol", s.tol);
  r.get("max_iter", s.max_iter);
  r.get("injectivity", s.injectivity);
  r.get("write_iterates", s.write_iterates);
  require(s.mode == "self" || s.mode == "loop", r, "mode", "expected self or loop");
  require(s.tol > 0.0, r, "tol", "must be positive");
  require(s.max_iter >= 1, r, "max_iter", "must be at least 1");
  require(s.injectivity > 0.0, r, "injectivity", "must be positive");
  if (r.has("initial")) {
    Reader i = r.child("initial");
    InitialCurveSpec& c = s.initial;
    i.get("file", c.file);
    if (!c.file.empty()) {
      require(fs::exists(resolve(base, c.file)), i, "file", "no such file '" + c.file + "'");
    } else {
      i.get("from", c.from);
      i.get("to", c.to);
      i.get("samples", c.samples);
      require(c.from.size() == 2 || c.from.size() == 3, i, "from", "needs 2 or 3 values");
      require(c.to.size() == c.from.size(), i, "to", "needs as many values as from");
      require(c.samples >= 3, i, "samples", "must be at least 3");
      if (i.has("wiggles")) {
        for (Reader w : i.children("wiggles")) {
          WiggleTerm t;
          w.get("coord", t.coord);
          w.get("amp", t.amp);
          w.get("k", t.k);
          require(t.coord >= 0 && t.coord < static_cast<int>(c.from.size()), w, "coord",
                  "coordinate index out of range");
          w.done();
          c.wiggles.push_back(t);
        }
      }
    }
    i.done();
  }
  r.done();
  return s;
}

// Serialization -------------------------------------------------------------

ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

ordered_json nums(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

ordered_json model_json(const ModelSpec& m) {
  ordered_json j;
  j["kind"] = m.kind;
  if (m.kind == "space_form") {
    j["dimension"] = m.dimension;
    j["K"] = num(m.K);
    return j;
  }
  j["chart"] = m.chart;
  if (!m.params.empty()) {
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : m.params) p[k] = num(v);
    j["params"] = p;
  }
  if (!m.terms.empty()) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : m.terms) {
      if (t.type == GraphTerm::Type::Poly)
        terms.push_back({{"type", "poly"}, {"c", num(t.c)}, {"pu", t.pu}, {"pv", t.pv}});
      else
        terms.push_back({{"type", t.type == GraphTerm::Type::Sin ? "sin" : "cos"},
                         {"c", num(t.c)},
                         {"a", num(t.a)},
                         {"b", num(t.b)}});
    }
    j["terms"] = terms;
  }
  if (m.domain)
    j["domain"] = {{"u_min", num(m.domain->u_min)},
                   {"u_max", num(m.domain->u_max)},
                   {"v_min", num(m.domain->v_min)},
                   {"v_max", num(m.domain->v_max)}};
  return j;
}

ordered_json fourier_json(const FourierCurve& c) {
  ordered_json coords = ordered_json::array();
  for (const auto& fc : c.coords) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : fc.terms) terms.push_back({num(t[0]), num(t[1]), num(t[2])});
    coords.push_back({{"c0", num(fc.c0)}, {"lin", num(fc.lin)}, {"terms", terms}});
  }
  return {{"omega", num(c.omega)}, {"coords", coords}};
}

ordered_json tractor_json(const TractorSpec& t) {
  ordered_json j;
  j["type"] = t.type;
  for (const auto& key : kTractorKeys.at(t.type)) {
    if (key == "t0") j[key] = num(t.t0);
    else if (key == "t1") j[key] = num(t.t1);
    else if (key == "origin") j[key] = nums(t.origin);
    else if (key == "direction") j[key] = nums(t.direction);
    else if (key == "radius") j[key] = num(t.radius);
    else if (key == "omega") j[key] = num(t.omega);
    else if (key == "pitch") j[key] = num(t.pitch);
    else if (key == "theta") j[key] = num(t.theta);
    else if (key == "phi0") j[key] = num(t.phi0);
    else if (key == "angle") j[key] = num(t.angle);
    else if (key == "fourier") j[key] = fourier_json(t.fourier);
    else if (key == "geodesic") j[key] = t.geodesic;
    else if (key == "file") j[key] = t.file;
    else if (key == "closed") j[key] = t.closed;
    else if (key == "sign") j[key] = t.sign;
    else if (key == "curve") j[key] = tractor_json(t.curve.at(0));
  }
  if (t.reverse) j["reverse"] = true;
  return j;
}

ordered_json gamma0_json(const Gamma0Spec& g) {
  ordered_json j;
  j["mode"] = g.mode;
  if (g.mode == "explicit") j["point"] = nums(g.point);
  if (g.mode == "offset") {
    j["d0"] = num(g.d0);
    j["side"] = g.side;
  }
  return j;
}

ordered_json sim_json(const SimParams& p) {
  return {{"dt", num(p.dt)},
          {"pole_step", num(p.pole_step)},
          {"cusp_speed_eps", num(p.cusp_speed_eps)},
          {"max_records", p.max_records},
          {"force_shooting", p.force_shooting},
          {"parallel", p.parallel}};
}

ordered_json comparison_json(const ComparisonSpec& c) {
  ordered_json j;
  j["enabled"] = c.enabled;
  if (c.K_lo) j["K_lo"] = num(*c.K_lo);
  if (c.K_hi) j["K_hi"] = num(*c.K_hi);
  j["pole_cap"] = num(c.pole_cap);
  j["checks"] = c.checks;
  j["jacobi_poles"] = c.jacobi_poles;
  j["constant_pad"] = num(c.constant_pad);
  j["grid_margin"] = num(c.grid_margin);
  j["grid"] = c.grid;
  return j;
}

ordered_json analytic_json(const AnalyticSpec& a) {
  ordered_json le = ordered_json::array();
  for (const auto& p : a.le) le.push_back({num(p[0]), num(p[1])});
  return {{"K", num(a.K)},         {"ell", num(a.ell)},         {"d0", num(a.d0)},
          {"s_max", num(a.s_max)}, {"samples", a.samples},      {"long_pole", a.long_pole},
          {"le", le}};
}

ordered_json shorten_json(const ShortenSpec& s) {
  ordered_json init;
  if (!s.initial.file.empty()) {
    init["file"] = s.initial.file;
  } else {
    init["from"] = nums(s.initial.from);
    init["to"] = nums(s.initial.to);
    init["samples"] = s.initial.samples;
    ordered_json w = ordered_json::array();
    for (const auto& t : s.initial.wiggles)
      w.push_back({{"coord", t.coord}, {"amp", num(t.amp)}, {"k", num(t.k)}});
    init["wiggles"] = w;
  }
  return {{"mode", s.mode},
          {"tol", num(s.tol)},
          {"max_iter", s.max_iter},
          {"injectivity", num(s.injectivity)},
          {"write_iterates", s.write_iterates},
          {"initial", init}};
}

// Builders ------------------------------------------------------------------

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::Config, field + ": " + msg);
}

void need_flat(const ManifoldModel& m, const std::string& type) {
  if (!m.is_flat_space()) config_error("tractor.type", "'" + type + "' needs a flat space form");
}

void need_dim(const std::vector<double>& v, const ManifoldModel& m, const std::string& field) {
  if (static_cast<int>(v.size()) != m.dimension())
    config_error(field, "expected " + std::to_string(m.dimension()) + " values");
}

TractorCurve build_tractor_spec(const TractorSpec& t, const ManifoldModel& model, double ell,
                                const SimParams& sim, const fs::path& base) {
  TractorCurve c;
  const std::string& type = t.type;
  if (type == "line") {
    need_flat(model, type);
    need_dim(t.origin, model, "tractor.origin");
    const Vec dir = to_vec(t.direction);
    if (!(dir.norm() > 0.0)) config_error("tractor.direction", "must be non-zero");
    FourierCurve f;
    for (int i = 0; i < model.dimension(); ++i)
      f.coords.push_back(FourierCoord{t.origin[i], dir[i] / dir.norm(), {}});
    c = TractorCurve::analytic(f, t.t0, t.t1, true);
  } else if (type == "geodesic") {
    need_dim(t.origin, model, "tractor.origin");
    const Vec p = to_vec(t.origin), v = to_vec(t.direction);
    if (!(model.norm(p, v) > 0.0)) config_error("tractor.direction", "must be non-zero");
    c = TractorCurve::geodesic(model, p, v, t.t0, t.t1);
  } else if (type == "equator" || type == "latitude") {
    if (model.kind() != ModelKind::SpaceForm || !(model.curvature_K() > 0.0))
      config_error("tractor.type", "'" + type + "' needs a space form with K > 0");
    c = type == "equator" ? sphere_equator(model.curvature_K(), t.phi0, t.t0, t.t1)
                          : sphere_latitude(model.curvature_K(), t.theta, t.phi0, t.t0, t.t1);
  } else if (type == "disk_diameter") {
    if (model.kind() != ModelKind::SpaceForm || !(model.curvature_K() < 0.0))
      config_error("tractor.type", "'disk_diameter' needs a space form with K < 0");
    c = TractorCurve::disk_diameter(model.curvature_K(), t.angle, t.t0, t.t1);
  } else if (type == "circle" || type == "helix") {
    need_flat(model, type);
    if (type == "helix" && model.dimension() != 3)
      config_error("model.dimension", "a helix needs dimension 3");
    std::vector<double> o = t.origin;
    if (o.empty()) o.assign(static_cast<std::size_t>(model.dimension()), 0.0);
    need_dim(o, model, "tractor.origin");
    FourierCurve f;
    f.omega = t.omega;
    f.coords.push_back(FourierCoord{o[0], 0.0, {{1.0, t.radius, 0.0}}});
    f.coords.push_back(FourierCoord{o[1], 0.0, {{1.0, 0.0, t.radius}}});
    if (model.dimension() == 3) f.coords.push_back(FourierCoord{o[2], t.pitch, {}});
    c = TractorCurve::analytic(f, t.t0, t.t1);
  } else if (type == "fourier") {
    if (static_cast<int>(t.fourier.coords.size()) != model.dimension())
      config_error("tractor.fourier.coords",
                   "expected " + std::to_string(model.dimension()) + " coordinates");
    c = TractorCurve::analytic(t.fourier, t.t0, t.t1, t.geodesic);
  } else if (type == "polyline") {
    const auto pts = read_polyline_csv(resolve(base, t.file));
    if (pts.size() < 2 || static_cast<int>(pts.front().size()) != model.dimension())
      config_error("tractor.file", "polyline does not match the model dimension");
    c = TractorCurve::polyline(model, pts, t.closed);
  } else if (type == "tractrix") {
    const auto raw = read_trace_gamma(resolve(base, t.file));
    std::vector<Vec> pts;
    for (const auto& p : raw)
      if (pts.empty() || (p - pts.back()).norm() > 1e-12) pts.push_back(p);
    if (pts.size() < 2 || static_cast<int>(pts.front().size()) != model.dimension())
      config_error("tractor.file", "trace does not match the model dimension");
    c = TractorCurve::polyline(model, pts);
  } else if (type == "from_tractrix") {
    const TractorCurve inner = build_tractor_spec(t.curve.at(0), model, ell, sim, base);
    c = tractor_from_tractrix(model, inner, ell, t.sign, sim.pole_step);
  }
  return t.reverse ? c.reversed() : c;
}

ShorteningOptions shortening_options(const ScenarioConfig& cfg) {
  ShorteningOptions o;
  o.tol = cfg.shorten.tol;
  o.max_iter = cfg.shorten.max_iter;
  o.sim = cfg.sim;
  o.injectivity = cfg.shorten.injectivity;
  o.keep_curves = cfg.shorten.write_iterates;
  return o;
}

fs::path file_in(const fs::path& out, const char* name, RunOutcome& r) {
  r.files.push_back(name);
  return out / name;
}

std::string fmt(double x) { return format_double(x); }

}  // namespace

// Parse / serialize -----------------------------------------------------------

ScenarioConfig parse_config(const std::string& text, const std::string& origin,
                            const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const std::size_t line = line_of(text, byte);
    const std::size_t bol = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    const std::size_t col = bol == std::string::npos ? byte + 1 : byte - bol;
    std::string what = e.what();
    if (const auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw Error(ErrorCode::Config,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
  const Source src{&text, origin};
  Reader r(j, "", src, {});
  ScenarioConfig c;
  c.base_dir = base_dir;
  r.get("name", c.name);
  r.get("description", c.description);
  r.get("command", c.command);
  require(kCommands.count(c.command) > 0, r, "command",
          "expected simulate, analytic, shorten or verify");
  if (r.has("model")) c.model = read_model(r.child("model"));
  if (r.has("tractor")) c.tractor = read_tractor(r.child("tractor"), base_dir);
  if (r.has("gamma0")) c.gamma0 = read_gamma0(r.child("gamma0"));
  r.get("ell", c.ell);
  require(c.ell > 0.0 && std::isfinite(c.ell), r, "ell", "must be positive");
  r.get("push", c.push);
  if (r.has("sim")) c.sim = read_sim(r.child("sim"));
  r.get("sweep", c.sweep);
  if (r.has("comparison")) c.comparison = read_comparison(r.child("comparison"));
  if (r.has("analytic")) c.analytic = read_analytic(r.child("analytic"));
  if (r.has("shorten")) c.shorten = read_shorten(r.child("shorten"), base_dir);
  if (r.has("verify")) {
    Reader v = r.child("verify");
    v.get("random_samples", c.verify.random_samples);
    require(c.verify.random_samples >= 0, v, "random_samples", "must be non-negative");
    v.done();
  }
  r.get("output", c.output);
  r.get("seed", c.seed);
  if (c.command == "shorten" && c.shorten.initial.file.empty() && c.shorten.initial.from.empty())
    r.fail("shorten", "shorten needs an initial curve");
  r.done();
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, path.string() + ": cannot read config");
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig c = parse_config(ss.str(), path.string(), path.parent_path());
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

std::string serialize_config(const ScenarioConfig& c) {
  const ScenarioConfig d;
  ordered_json j;
  if (!c.name.empty()) j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["command"] = c.command;
  j["model"] = model_json(c.model);
  if (c.tractor != d.tractor || c.command == "simulate" || c.command == "verify")
    j["tractor"] = tractor_json(c.tractor);
  if (c.gamma0 != d.gamma0) j["gamma0"] = gamma0_json(c.gamma0);
  j["ell"] = num(c.ell);
  if (c.push) j["push"] = true;
  if (c.sim != d.sim) j["sim"] = sim_json(c.sim);
  if (!c.sweep) j["sweep"] = false;
  if (c.comparison != d.comparison) j["comparison"] = comparison_json(c.comparison);
  if (c.analytic != d.analytic) j["analytic"] = analytic_json(c.analytic);
  if (c.shorten != d.shorten) j["shorten"] = shorten_json(c.shorten);
  if (c.verify != d.verify) j["verify"] = {{"random_samples", c.verify.random_samples}};
  if (!c.output.empty()) j["output"] = c.output;
  if (c.seed != 0) j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

// Builders ------------------------------------------------------------------

ManifoldModel build_model(const ModelSpec& m) {
  try {
    if (m.kind == "space_form") return ManifoldModel::space_form(m.dimension, m.K);
    return make_catalog_surface(m.chart, m.params, m.terms, m.domain);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) config_error("model", e.what());
    throw;
  }
}

TractorCurve build_tractor(const ScenarioConfig& cfg, const ManifoldModel& model) {
  return build_tractor_spec(cfg.tractor, model, cfg.ell, cfg.sim, cfg.base_dir);
}

Vec build_gamma0(const ScenarioConfig& cfg, const ManifoldModel& model,
                 const TractorCurve& tractor) {
  const Gamma0Spec& g = cfg.gamma0;
  if (g.mode == "explicit") {
    need_dim(g.point, model, "gamma0.point");
    return to_vec(g.point);
  }
  if (g.mode == "offset") {
    if (!tractor.is_geodesic()) config_error("gamma0.mode", "offset placement needs a geodesic tractor");
    if (g.d0 > cfg.ell) config_error("gamma0.d0", "must not exceed ell");
    return place_at_offset(model, tractor, cfg.ell, g.d0, g.side);
  }
  return place_behind(model, tractor, cfg.ell);
}

std::vector<Vec> build_initial_curve(const ScenarioConfig& cfg) {
  const InitialCurveSpec& s = cfg.shorten.initial;
  if (!s.file.empty()) return read_polyline_csv(resolve(cfg.base_dir, s.file));
  const Vec a = to_vec(s.from), b = to_vec(s.to);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(s.samples) + 1);
  for (int i = 0; i <= s.samples; ++i) {
    const double tau = static_cast<double>(i) / s.samples;
    Vec x = a + tau * (b - a);
    for (const auto& w : s.wiggles) x[w.coord] += w.amp * std::sin(w.k * M_PI * tau);
    pts.push_back(x);
  }
  pts.front() = a;
  pts.back() = b;
  return pts;
}

TractrixTrace simulate_scenario(const ScenarioConfig& cfg) {
  const ManifoldModel model = build_model(cfg.model);
  const TractorCurve tractor = build_tractor(cfg, model);
  if (tractor.dimension() != model.dimension())
    config_error("tractor", "dimension does not match the model");
  if (cfg.push) {
    const Vec g0 = build_gamma0(cfg, model, tractor.reversed());
    return pushed_simulate(model, tractor, g0, cfg.ell, cfg.sim);
  }
  const Vec g0 = build_gamma0(cfg, model, tractor);
  return simulate(model, tractor, g0, cfg.ell, cfg.sim);
}

ShorteningRun shorten_scenario(const ScenarioConfig& cfg) {
  const ManifoldModel model = build_model(cfg.model);
  const std::vector<Vec> initial = build_initial_curve(cfg);
  for (const auto& p : initial)
    if (p.size() != model.dimension()) config_error("shorten.initial", "dimension does not match the model");
  const ShorteningOptions o = shortening_options(cfg);
  if (cfg.shorten.mode == "loop") return loop_repeated(model, initial, cfg.ell, o);
  return self_repeated(model, initial.front(), initial.back(), initial, cfg.ell, o);
}

VerifyResult verify_trace(const ScenarioConfig& cfg, const TractrixTrace& trace) {
  const ComparisonSpec& cs = cfg.comparison;
  VerifyResult out;
  out.report.scenario = cfg.name;
  CertifyOptions co;
  co.constant_pad = cs.constant_pad;
  co.grid_margin = cs.grid_margin;
  co.grid = cs.grid;
  const Rect region = visited_region(trace, cfg.sim.pole_step);
  const CurvatureBounds bounds = certify_bounds(trace.model, region, co, cs.K_lo, cs.K_hi);
  out.bounds.push_back(bounds);
  ComparisonOptions opts;
  opts.pole_cap = cs.pole_cap;
  auto has = [&](const char* n) {
    return std::find(cs.checks.begin(), cs.checks.end(), n) != cs.checks.end();
  };
  if (has("rauch_length_area")) out.report.append(rauch_length_area_check(trace, bounds, opts));
  if (has("rauch_jacobi") && cs.jacobi_poles > 0) {
    std::vector<std::size_t> regular;
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      if (!trace.records[i].singular) regular.push_back(i);
    const int n = std::min<int>(cs.jacobi_poles, static_cast<int>(regular.size()));
    for (int k = 0; k < n; ++k) {
      const std::size_t idx = regular[n == 1 ? 0 : (regular.size() - 1) * k / (n - 1)];
      const TraceRecord& rec = trace.records[idx];
      const PoleGeodesic pole =
          exp_map(trace.model, rec.gamma, rec.pole_dir, trace.ell, cfg.sim.pole_step, {true, true});
      ComparisonReport r = rauch_jacobi_check(trace.model, pole, bounds);
      for (auto& c : r.checks) c.note = "record " + std::to_string(idx) + (c.note.empty() ? "" : "; " + c.note);
      out.report.append(r);
    }
  }
  if (has("toponogov")) {
    try {
      out.report.append(toponogov_sandwich_check(trace, bounds, opts));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::HypothesisViolated) throw;
      Check c;
      c.name = "toponogov";
      c.status = Check::Status::Skipped;
      c.note = e.what();
      out.report.checks.push_back(c);
    }
  }
  if (has("le")) out.report.append(le_sandwich_check(trace, trace.ell, bounds));

  if (cfg.verify.random_samples > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const ManifoldModel& m = trace.model;
    double worst = 0.0;
    for (int i = 0; i < cfg.verify.random_samples; ++i) {
      const auto& rec = trace.records[static_cast<std::size_t>(unit(rng) * trace.records.size()) %
                                      trace.records.size()];
      const Vec p = rec.gamma;
      Vec v(p.size());
      for (int k = 0; k < p.size(); ++k) v[k] = gauss(rng);
      v /= m.norm(p, v);
      const double len = trace.ell * (0.3 + 0.7 * unit(rng));
      const PoleGeodesic g = exp_map(m, p, v, len, cfg.sim.pole_step, {true, false});
      Vec guess = v;
      for (int k = 0; k < p.size(); ++k) guess[k] += 0.02 * gauss(rng);
      ShootOptions so;
      so.steps = pole_steps(len, cfg.sim.pole_step);
      const ShootResult sh = geodesic_shoot(m, p, g.endpoint(), len * 1.02, guess, so);
      worst = std::max(worst, m.norm(p, sh.direction - v));
    }
    // Scaled so that the report's margin rule matches the 1e-8 gate.
    Check c;
    c.name = "shooting_round_trip";
    c.inequality = "max |v_shot - v| / 1e-8 <= 1";
    c.lhs = worst / 1e-8;
    c.rhs = 1.0;
    c.margin = c.rhs - c.lhs;
    c.status = c.margin >= -kPassTolerance ? Check::Status::Pass : Check::Status::Fail;
    c.samples = static_cast<std::size_t>(cfg.verify.random_samples);
    c.violations = c.margin < 0.0 ? 1 : 0;
    out.report.checks.push_back(c);
  }
  return out;
}

// Commands ------------------------------------------------------------------

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DomainViolation:
    case ErrorCode::PoleTooLong:
    case ErrorCode::OutOfDomain:
    case ErrorCode::UncertifiedBounds:
    case ErrorCode::HypothesisViolated:
      return 1;
    default:
      return 2;
  }
}

RunOutcome cmd_simulate(const ScenarioConfig& cfg, const fs::path& out) {
  RunOutcome r;
  const TractrixTrace trace = simulate_scenario(cfg);
  write_trace_csv(file_in(out, "trace.csv", r), trace);
  write_cusps(file_in(out, "cusps.txt", r), trace);
  std::ostringstream ss;
  ss << trace.records.size() << " records, " << trace.cusps.size() << " cusps";
  if (cfg.sweep) {
    const SweepResult sw = compute_sweep(trace);
    write_sweep(file_in(out, "sweep.txt", r), sw);
    ss << ", L_gamma " << fmt(sw.L_gamma) << ", L_eta " << fmt(sw.L_eta) << ", K_total "
       << fmt(sw.K_total) << ", area " << fmt(sw.area);
  }
  r.summary = ss.str();
  return r;
}

RunOutcome cmd_analytic(const ScenarioConfig& cfg, const fs::path& out) {
  RunOutcome r;
  const AnalyticSpec& a = cfg.analytic;
  const SpaceFormSolution sol = solve_from_d0(a.K, a.ell, a.d0, a.long_pole);
  std::vector<double> s(static_cast<std::size_t>(a.samples));
  for (int i = 0; i < a.samples; ++i) s[i] = a.s_max * i / (a.samples - 1);
  write_analytic_csv(file_in(out, "analytic.csv", r), spaceform_table(sol, s, Exec::Parallel));
  std::vector<LeEntry> le{{a.K, a.ell, leading_exponent(a.K, a.ell)}};
  for (const auto& p : a.le) le.push_back({p[0], p[1], leading_exponent(p[0], p[1])});
  write_le(file_in(out, "le.txt", r), le);
  if (a.long_pole) {
    if (a.K != 1.0) config_error("analytic.long_pole", "long-pole tables need K = 1");
    write_long_pole_csv(file_in(out, "long_pole.csv", r),
                        long_pole_vertices(a.ell, a.d0, a.s_max, a.samples));
  }
  r.summary = std::to_string(a.samples) + " samples, Le " + fmt(le.front().Le);
  return r;
}

RunOutcome cmd_shorten(const ScenarioConfig& cfg, const fs::path& out) {
  RunOutcome r;
  const ShorteningRun run = shorten_scenario(cfg);
  write_history(file_in(out, "history.csv", r), run);
  if (cfg.shorten.write_iterates) {
    write_iterates(out, run);
    for (std::size_t i = 0; i < run.iterates.size(); ++i)
      if (!run.iterates[i].curve.empty()) r.files.push_back("iter_" + std::to_string(i) + ".csv");
  }
  const auto& last = run.iterates.back();
  r.summary = std::to_string(run.iterates.size() - 1) + " rounds, stop " + run.stop_reason +
              ", length " + fmt(last.length) + ", residual " + fmt(last.residual);
  return r;
}

RunOutcome cmd_verify(const ScenarioConfig& cfg, const fs::path& out) {
  RunOutcome r;
  const TractrixTrace trace = simulate_scenario(cfg);
  const VerifyResult v = verify_trace(cfg, trace);
  write_report(file_in(out, "report.txt", r), v.report, v.bounds);
  std::size_t skipped = 0;
  for (const auto& c : v.report.checks) skipped += c.status == Check::Status::Skipped;
  r.summary = std::to_string(v.report.passes()) + " passed, " + std::to_string(v.report.failures()) +
              " failed, " + std::to_string(skipped) + " skipped";
  r.exit_code = v.report.ok() ? 0 : 3;
  return r;
}

RunOutcome run_scenario(const ScenarioConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  if (cfg.command == "analytic") return cmd_analytic(cfg, out);
  if (cfg.command == "shorten") return cmd_shorten(cfg, out);
  if (cfg.command == "verify") return cmd_verify(cfg, out);
  return cmd_simulate(cfg, out);
}

RunOutcome run_scenario_guarded(const ScenarioConfig& cfg, const fs::path& out) {
  try {
    return run_scenario(cfg, out);
  } catch (const Error& e) {
    RunOutcome r;
    r.exit_code = exit_code_for(e.code());
    r.summary = e.what();
    return r;
  } catch (const fs::filesystem_error& e) {
    RunOutcome r;
    r.exit_code = 1;
    r.summary = e.what();
    return r;
  }
}

}  // namespace tractrix
