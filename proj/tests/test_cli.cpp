#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flrw/cli/commands.hpp"
#include "flrw/cli/config.hpp"
#include "flrw/errors.hpp"
#include "flrw/report.hpp"

using namespace flrw;
using namespace flrw::cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> problems_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides, false);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& what) {
  for (const auto& p : ps)
    if (p.find(what) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("flrwkg-test-" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

const char* kMinimal = "[cosmology]\nn = 1\nH = 0\nm = 1\n";

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const RunConfig c = parse_config(kMinimal, {}, false);
  CHECK(c.cosmology.sigma == 0.0);
  CHECK(c.cosmology.a0 == 1.0);
  CHECK(c.cosmology.c == 1.0);
  CHECK(c.nonlinearity.is_linear());
  CHECK(c.exponents.C == 1.0);
  CHECK(c.exponents.C0 == 1.0);
  CHECK_FALSE(c.exponents.D.has_value());
  CHECK(c.grid.n_dim == 1);
}

TEST_CASE("parse, echo, parse is the identity") {
  const std::string text = R"(# comment
[cosmology]
n = 2
H = 0.123456789012345
sigma = -0.3
c = 1.7
m = 0.1
a0 = 2.5

[nonlinearity]
lambda = -0.25
lambda_imag = 0.125
p = 2.75
form = gauge_variant

[exponents]
mu0 = 0.3
inv_q = 0.1
D = 0.015625

[grid]
points = 32
length = 7.5

[solver]
dt = 0.00025
scheme = both
ledger_rule = simpson
adaptive = true

[blowup]
growth_factor = 500

[data]
kind = plane_wave
k = 2,-1,0

[output]
seed = 99
snapshots = true
)";
  const RunConfig a = parse_config(text, {}, false);
  const std::string e1 = echo_config(a);
  const RunConfig b = parse_config(e1, {}, false);
  CHECK(echo_config(b) == e1);
  CHECK(b.cosmology.hubble == a.cosmology.hubble);
  CHECK(b.nonlinearity.lambda == a.nonlinearity.lambda);
  CHECK(b.data.k == std::array<int, 3>{2, -1, 0});
  CHECK(b.exponents.inv_q == a.exponents.inv_q);
  CHECK(b.output.seed == 99);
  CHECK(b.blowup.growth_factor == 500.0);
  CHECK(b.grid.n_dim == 2);
}

TEST_CASE("every problem is reported at once") {
  const std::string text = R"([cosmology]
n = 1
H = fast
bogus = 3

[nonlinearity]
p = 0.5

[warp]
drive = 9

[solver]
dt = -1
)";
  const auto ps = problems_of(text);
  CHECK(mentions(ps, "missing required key 'm'"));
  CHECK(mentions(ps, "bogus"));
  CHECK(mentions(ps, "warp"));
  CHECK(mentions(ps, "H"));
  CHECK(ps.size() >= 4);
}

TEST_CASE("p below one is rejected") {
  const auto ps = problems_of(kMinimal, {"nonlinearity.p=0.5", "nonlinearity.lambda=1"});
  CHECK(mentions(ps, "p >= 1 required"));
  CHECK(problems_of(kMinimal, {"nonlinearity.p=1", "nonlinearity.lambda=1"}).empty());
}

TEST_CASE("overrides win over the file and the environment sets the output directory") {
  RunConfig c = parse_config(kMinimal, {"cosmology.m=2.5", "output.directory=here"}, false);
  CHECK(c.cosmology.mass == 2.5);
  CHECK(c.output.directory == "here");
  CHECK_FALSE(problems_of(kMinimal, {"cosmology.m"}).empty());
  CHECK(mentions(problems_of(kMinimal, {"nosuch.key=1"}), "nosuch"));

  setenv(kOutputDirEnv, "from-env", 1);
  c = parse_config(kMinimal);
  CHECK(c.output.directory == "from-env");
  c = parse_config(kMinimal, {"output.directory=flag"});
  CHECK(c.output.directory == "flag");
  unsetenv(kOutputDirEnv);
}

TEST_CASE("key table covers the echo") {
  const std::string e = echo_config(parse_config(kMinimal, {}, false));
  for (const auto& k : key_table()) {
    if (k.default_value.empty() && k.section != "cosmology") continue;
    CHECK_MESSAGE(e.find(k.key + " = ") != std::string::npos, k.section << "." << k.key);
  }
}

TEST_CASE("regimes: static case with D = 0.1 gives T = 100") {
  const fs::path dir = scratch("regimes");
  RunConfig c = parse_config(kMinimal,
                             {"nonlinearity.lambda=1", "nonlinearity.p=3", "exponents.D=0.1", "exponents.inv_q=0",
                              "output.directory=" + dir.string()},
                             false);
  std::ostringstream out, err;
  REQUIRE(run_command("regimes", c, {}, out, err) == exit_ok);
  const Json j = read_json(dir / "regimes.json");
  CHECK(j["version"] == version_string());
  CHECK(j["config"] == echo_config(c));
  CHECK(j["local"]["matched_case"] == "local.i");
  CHECK(j["local"]["admissible_T"].get<double>() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(slurp(dir / "MANIFEST").find("status complete") != std::string::npos);
}

TEST_CASE("regimes: de Sitter echoes an infinite life span") {
  const fs::path dir = scratch("desitter");
  RunConfig c = parse_config("[cosmology]\nn = 1\nH = 0.5\nsigma = -1\nm = 1\n",
                             {"nonlinearity.lambda=1", "nonlinearity.p=3", "output.directory=" + dir.string()}, false);
  std::ostringstream out, err;
  REQUIRE(run_command("regimes", c, {}, out, err) == exit_ok);
  const Json j = read_json(dir / "regimes.json");
  CHECK(j["local"]["horizons"]["T0"] == "inf");
}

TEST_CASE("regimes: case table over a sweep") {
  const fs::path dir = scratch("sweep");
  RunConfig c = parse_config(kMinimal,
                             {"nonlinearity.lambda=1", "nonlinearity.p=3", "exponents.D=0.1",
                              "output.directory=" + dir.string()},
                             false);
  CommandOptions opt;
  opt.case_table = true;
  opt.sweeps = {parse_sweep("cosmology.H=0,0.5"), parse_sweep("exponents.D=0.1,1")};
  std::ostringstream out, err;
  REQUIRE(run_command("regimes", c, opt, out, err) == exit_ok);
  std::istringstream csv(slurp(dir / "case_table.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("cosmology.H,exponents.D,kind,label", 0) == 0);
  std::map<std::string, int> per_point;
  while (std::getline(csv, line)) per_point[line.substr(0, line.find(',', line.find(',') + 1))]++;
  CHECK(per_point.size() == 4);
  CHECK_THROWS_AS(parse_sweep("cosmology.H=a,b"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("nokey"), ConfigError);
}

TEST_CASE("simulate: zero data gives zero trajectory and ledger, bit-identical on rerun") {
  const fs::path dir = scratch("zero");
  RunConfig c = parse_config(kMinimal,
                             {"nonlinearity.lambda=-1", "data.amplitude=0", "grid.points=32", "solver.t_end=0.5",
                              "solver.dt=0.01", "output.directory=" + dir.string()},
                             false);
  std::ostringstream out, err;
  REQUIRE(run_command("simulate", c, {}, out, err) == exit_ok);
  const std::string traj = slurp(dir / "trajectory_mol.csv");
  const std::string ledger = slurp(dir / "ledger_mol.csv");
  std::istringstream rows(traj + ledger);
  std::string line;
  int data_rows = 0;
  while (std::getline(rows, line)) {
    if (line.rfind("t,", 0) == 0) continue;
    ++data_rows;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');  // time
    while (std::getline(cells, cell, ',')) CHECK_MESSAGE(std::stod(cell) == 0.0, line);
  }
  CHECK(data_rows > 2);

  REQUIRE(run_command("simulate", c, {}, out, err) == exit_ok);
  CHECK(slurp(dir / "trajectory_mol.csv") == traj);
  CHECK(slurp(dir / "ledger_mol.csv") == ledger);
}

TEST_CASE("exit codes and partial-run manifests") {
  const fs::path dir = scratch("exit");
  RunConfig c = parse_config(kMinimal, {"nonlinearity.lambda=-1", "grid.points=32", "output.directory=" + dir.string()},
                             false);
  std::ostringstream out, err;
  // Small gaussian data are not a blow-up witness.
  CHECK(run_command("blowup", c, {}, out, err) == exit_config_error);
  CHECK(fs::exists(dir / "certification.json"));
  CHECK(run_command("teleport", c, {}, out, err) == exit_config_error);
  CHECK(slurp(dir / "MANIFEST").find("failed at") != std::string::npos);

  // The kernel Wronskian guard trips at a step far too coarse for the grid.
  c = parse_config(kMinimal, {"grid.points=256", "solver.dt=0.5", "solver.t_end=5", "output.directory=" + dir.string()},
                   false);
  CHECK(run_command("scatter", c, {}, out, err) == exit_numerical_failure);
  CHECK(slurp(dir / "MANIFEST").find("failed at duhamel run") != std::string::npos);
}
