#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tractrix/charts.hpp"
#include "tractrix/comparison.hpp"
#include "tractrix/error.hpp"
#include "tractrix/shortening.hpp"
#include "tractrix/trace.hpp"
#include "tractrix/tractor.hpp"

namespace tractrix {

// A scenario file is a JSON object with nested sections; see README.md for
// the keys. Every section is optional except the ones the command needs.

struct ModelSpec {
  std::string kind = "space_form";  // space_form | surface
  int dimension = 2;
  double K = 0.0;
  std::string chart;  // catalog name for surfaces
  std::map<std::string, double> params;
  std::vector<GraphTerm> terms;
  std::optional<Rect> domain;
  bool operator==(const ModelSpec&) const = default;
};

// Tractor types and the keys they read:
//   line          origin, direction                (flat, unit speed)
//   geodesic      origin, direction                (any model)
//   equator       phi0                             (K > 0)
//   latitude      theta, phi0                      (K > 0)
//   disk_diameter angle                            (K < 0)
//   circle        origin, radius, omega            (flat 2D/3D, in the x-y plane)
//   helix         origin, radius, omega, pitch     (flat 3D)
//   fourier       fourier, geodesic
//   polyline      file, closed
//   tractrix      file                             (gamma of a previous trace.csv)
//   from_tractrix curve, sign                      (pole-end curve of another curve)
// All types read t0, t1; reverse swaps the direction of travel.
struct TractorSpec {
  std::string type = "line";
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> origin;
  std::vector<double> direction;
  double radius = 1.0;
  double omega = 1.0;
  double pitch = 0.0;
  double theta = 1.5707963267948966;
  double phi0 = 0.0;
  double angle = 0.0;
  FourierCurve fourier;
  bool geodesic = false;
  std::string file;
  bool closed = false;
  int sign = 1;
  std::vector<TractorSpec> curve;  // from_tractrix: exactly one entry
  bool reverse = false;
  bool operator==(const TractorSpec&) const = default;
};

// explicit: point; offset: d0, side (geodesic tractors); behind: pole along
// the tractor's initial tangent.
struct Gamma0Spec {
  std::string mode = "behind";
  std::vector<double> point;
  double d0 = 0.0;
  int side = 1;
  bool operator==(const Gamma0Spec&) const = default;
};

struct ComparisonSpec {
  bool enabled = false;
  std::optional<double> K_lo;
  std::optional<double> K_hi;
  double pole_cap = std::numeric_limits<double>::infinity();
  std::vector<std::string> checks{"rauch_length_area", "rauch_jacobi", "toponogov", "le"};
  int jacobi_poles = 5;
  double constant_pad = 1e-3;
  double grid_margin = 0.05;
  int grid = 200;
  bool operator==(const ComparisonSpec&) const = default;
};

struct AnalyticSpec {
  double K = 0.0;
  double ell = 1.0;
  double d0 = 0.5;
  double s_max = 10.0;
  int samples = 201;
  bool long_pole = false;
  std::vector<std::array<double, 2>> le;  // extra (K, ell) pairs for le.txt
  bool operator==(const AnalyticSpec&) const = default;
};

// x(tau) = from + tau (to - from) + sum amp sin(k pi tau) e_coord, tau in [0, 1].
struct WiggleTerm {
  int coord = 1;
  double amp = 0.0;
  double k = 1.0;
  bool operator==(const WiggleTerm&) const = default;
};

struct InitialCurveSpec {
  std::vector<double> from;
  std::vector<double> to;
  int samples = 200;
  std::vector<WiggleTerm> wiggles;
  std::string file;  // polyline file instead of the generator
  bool operator==(const InitialCurveSpec&) const = default;
};

struct ShortenSpec {
  std::string mode = "self";  // self | loop
  double tol = 1e-6;
  int max_iter = 500;
  double injectivity = std::numeric_limits<double>::infinity();
  InitialCurveSpec initial;
  bool write_iterates = true;
  bool operator==(const ShortenSpec&) const = default;
};

struct VerifySpec {
  int random_samples = 0;  // seeded shooting round trips
  bool operator==(const VerifySpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  std::string command = "simulate";  // simulate | analytic | shorten | verify
  ModelSpec model;
  TractorSpec tractor;
  Gamma0Spec gamma0;
  double ell = 1.0;
  bool push = false;
  SimParams sim;
  bool sweep = true;
  ComparisonSpec comparison;
  AnalyticSpec analytic;
  ShortenSpec shorten;
  VerifySpec verify;
  std::string output;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;  // relative file names resolve here; not serialized
  bool operator==(const ScenarioConfig&) const = default;
};

// Parse errors carry line:column, validation errors the field path and the
// line of its key. Both throw Error(Config).
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& cfg);

ManifoldModel build_model(const ModelSpec& spec);
TractorCurve build_tractor(const ScenarioConfig& cfg, const ManifoldModel& model);
Vec build_gamma0(const ScenarioConfig& cfg, const ManifoldModel& model,
                 const TractorCurve& tractor);
std::vector<Vec> build_initial_curve(const ScenarioConfig& cfg);

TractrixTrace simulate_scenario(const ScenarioConfig& cfg);
ShorteningRun shorten_scenario(const ScenarioConfig& cfg);

struct VerifyResult {
  ComparisonReport report;
  std::vector<CurvatureBounds> bounds;
};
VerifyResult verify_trace(const ScenarioConfig& cfg, const TractrixTrace& trace);

// Exit codes: 0 success, 1 validation, 2 numeric failure, 3 verification failure.
int exit_code_for(ErrorCode code);

struct RunOutcome {
  int exit_code = 0;
  std::string summary;
  std::vector<std::string> files;
};

RunOutcome cmd_simulate(const ScenarioConfig& cfg, const std::filesystem::path& out);
RunOutcome cmd_analytic(const ScenarioConfig& cfg, const std::filesystem::path& out);
RunOutcome cmd_shorten(const ScenarioConfig& cfg, const std::filesystem::path& out);
RunOutcome cmd_verify(const ScenarioConfig& cfg, const std::filesystem::path& out);
// Dispatches on cfg.command.
RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out);
// Same, with library errors turned into the matching exit code.
RunOutcome run_scenario_guarded(const ScenarioConfig& cfg, const std::filesystem::path& out);

}  // namespace tractrix
