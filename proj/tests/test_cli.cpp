#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tractrix/error.hpp"
#include "tractrix/scenario.hpp"

namespace fs = std::filesystem;
using namespace tractrix;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(TRACTRIX_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tractrix_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scen(const std::string& name) {
  return std::string(TRACTRIX_SCENARIOS) + "/" + name + ".json";
}

// Every regular file under a directory, by relative path.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), root).string(), slurp(e.path()));
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("exit code 0 writes the outputs") {
  const auto d = scratch("ok");
  const auto r = cli("simulate --config " + scen("classical") + " --out " + (d / "o").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("1001 records") != std::string::npos);
  for (const char* f : {"trace.csv", "sweep.txt", "cusps.txt"}) CHECK(fs::exists(d / "o" / f));

  const auto a = cli("analytic --K -1 --ell 1 --d0 0.5 --out " + (d / "a").string());
  CHECK(a.code == 0);
  CHECK(fs::exists(d / "a" / "analytic.csv"));
  CHECK(fs::exists(d / "a" / "le.txt"));
}

TEST_CASE("exit code 1: parse errors carry line and column") {
  const auto d = scratch("parse");
  const auto p = write(d, "bad.json", "{\n  \"name\": \"x\",\n  \"ell\": 1,,\n}\n");
  const auto r = cli("simulate --config " + p.string() + " --out " + (d / "o").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("bad.json:3:12") != std::string::npos);
  CHECK(r.out.find("Config") != std::string::npos);
}

TEST_CASE("exit code 1: field diagnostics name the field and its line") {
  const auto d = scratch("field");
  const auto p = write(d, "bad.json", "{\n  \"name\": \"x\",\n  \"ell\": -1\n}\n");
  auto r = cli("simulate --config " + p.string() + " --out " + (d / "o").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("bad.json:3") != std::string::npos);
  CHECK(r.out.find("ell") != std::string::npos);

  const auto q = write(d, "model.json",
                       "{\n  \"name\": \"x\",\n  \"model\": {\n    \"kind\": \"surface\",\n"
                       "    \"chart\": \"nope\"\n  }\n}\n");
  r = cli("simulate --config " + q.string() + " --out " + (d / "o").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("model.chart") != std::string::npos);

  r = cli("analytic --K 1 --ell 2 --d0 0.5 --out " + (d / "a").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("DomainViolation") != std::string::npos);

  r = cli("simulate --config " + (d / "missing.json").string());
  CHECK(r.code != 0);
}

TEST_CASE("exit code 2: numeric failure") {
  const auto d = scratch("numeric");
  // The pole does not have length ell at the start.
  const auto p = write(d, "drift.json", R"({
  "name": "drift",
  "model": {"kind": "space_form", "dimension": 2, "K": 0},
  "tractor": {"type": "line", "t0": 0, "t1": 1, "origin": [0, 0], "direction": [1, 0]},
  "gamma0": {"mode": "explicit", "point": [0, 3]},
  "ell": 1
})");
  const auto r = cli("simulate --config " + p.string() + " --out " + (d / "o").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("PoleLengthDrift") != std::string::npos);
  CHECK(exit_code_for(ErrorCode::LowConfidenceFit) == 2);
  CHECK(exit_code_for(ErrorCode::UncertifiedBounds) == 1);
}

TEST_CASE("exit code 3: a comparison check fails") {
  const auto d = scratch("verify");
  // Exact sphere bounds with almost no padding and a coarse step: the sharp
  // area identity misses by more than the pass tolerance.
  auto cfg = load_config(scen("verify_sphere"));
  cfg.comparison.constant_pad = 1e-12;
  cfg.comparison.checks = {"rauch_length_area", "toponogov"};
  cfg.sim.dt = 0.3;
  cfg.verify.random_samples = 0;
  const auto p = write(d, "fail.json", serialize_config(cfg));
  const auto r = cli("verify --config " + p.string() + " --out " + (d / "o").string());
  CHECK(r.code == 3);
  CHECK(r.out.find("failed") != std::string::npos);
  CHECK(fs::exists(d / "o" / "report.txt"));

  const auto ok = cli("verify --config " + scen("verify_flat") + " --out " + (d / "ok").string());
  CHECK(ok.code == 0);
}

TEST_CASE("bundled configs survive a serialize round trip") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(TRACTRIX_SCENARIOS)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const auto a = load_config(e.path());
    const auto b = parse_config(serialize_config(a), "roundtrip", a.base_dir);
    CHECK(a == b);
    CHECK(serialize_config(b) == serialize_config(a));
    ++n;
  }
  CHECK(n >= 30);
}

TEST_CASE("outputs are byte-identical across runs and seeds are honoured") {
  const auto d = scratch("determinism");
  for (const char* name : {"hilly", "classical_cusp"}) {
    const auto r1 = cli(std::string("simulate --config ") + scen(name) + " --out " + (d / "a").string());
    const auto r2 = cli(std::string("simulate --config ") + scen(name) + " --out " + (d / "b").string());
    CHECK(r1.code == 0);
    CHECK(r2.code == 0);
    CHECK(tree(d / "a") == tree(d / "b"));
    const auto r3 = cli(std::string("simulate --jobs 4 --config ") + scen(name) + " --out " +
                        (d / "c").string());
    CHECK(r3.code == 0);
    CHECK(tree(d / "a") == tree(d / "c"));
  }
  const std::string v = "verify --config " + scen("verify_sphere");
  CHECK(cli(v + " --seed 3 --out " + (d / "s1").string()).code == 0);
  CHECK(cli(v + " --seed 3 --out " + (d / "s2").string()).code == 0);
  CHECK(cli(v + " --seed 4 --out " + (d / "s3").string()).code == 0);
  const auto r1 = slurp(d / "s1" / "report.txt");
  CHECK(r1 == slurp(d / "s2" / "report.txt"));
  CHECK(r1 != slurp(d / "s3" / "report.txt"));
}

TEST_CASE("gallery output does not depend on --jobs") {
  const auto d = scratch("gallery");
  const fs::path src = d / "scenarios";
  fs::create_directories(src);
  for (const char* name : {"classical", "sphere_quarter", "analytic_hyperbolic", "shorten_flat",
                           "verify_flat"})
    fs::copy_file(scen(name), src / (std::string(name) + ".json"));
  const auto r1 = cli("gallery --dir " + src.string() + " --jobs 1 --out " + (d / "j1").string());
  const auto r2 = cli("gallery --dir " + src.string() + " --jobs 3 --out " + (d / "j3").string());
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(r1.out.find("5 scenarios") != std::string::npos);
  const auto t1 = tree(d / "j1");
  CHECK(t1.size() > 10);
  CHECK(t1 == tree(d / "j3"));
}
