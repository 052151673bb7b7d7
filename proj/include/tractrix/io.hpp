#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tractrix/comparison.hpp"
#include "tractrix/functionals.hpp"
#include "tractrix/kernels.hpp"
#include "tractrix/shortening.hpp"
#include "tractrix/spaceform.hpp"
#include "tractrix/trace.hpp"

namespace tractrix {

// Shortest decimal that parses back to the same double; "nan", "inf", "-inf"
// for non-finite values.
std::string format_double(double x);

// t,s,gamma_*,eta_*,d,kappa,sigma. d is empty without a geodesic tractor and
// kappa is empty at cusps and masked records.
void write_trace_csv(const std::filesystem::path& path, const TractrixTrace& trace);
void write_cusps(const std::filesystem::path& path, const TractrixTrace& trace);
void write_sweep(const std::filesystem::path& path, const SweepResult& sweep);

struct LeEntry {
  double K = 0.0;
  double ell = 0.0;
  double Le = 0.0;
};

void write_analytic_csv(const std::filesystem::path& path, const std::vector<SpaceFormRow>& rows);
void write_le(const std::filesystem::path& path, const std::vector<LeEntry>& entries);
void write_long_pole_csv(const std::filesystem::path& path,
                         const std::vector<LongPoleSample>& samples);

void write_history(const std::filesystem::path& path, const ShorteningRun& run);
// One iter_<n>.csv per iterate with a stored curve.
void write_iterates(const std::filesystem::path& dir, const ShorteningRun& run);
void write_polyline_csv(const std::filesystem::path& path, const std::vector<Vec>& pts);

void write_report(const std::filesystem::path& path, const ComparisonReport& report,
                  const std::vector<CurvatureBounds>& bounds);

// Rows of numbers; a first line that does not parse as numbers is a header.
std::vector<std::vector<double>> read_csv_numbers(const std::filesystem::path& path);
// Chart points from a polyline file (every column a coordinate).
std::vector<Vec> read_polyline_csv(const std::filesystem::path& path);
// gamma columns of a trace.csv written by write_trace_csv.
std::vector<Vec> read_trace_gamma(const std::filesystem::path& path);

}  // namespace tractrix
