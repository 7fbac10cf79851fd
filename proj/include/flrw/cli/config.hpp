#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "flrw/cosmology.hpp"
#include "flrw/diagnostics.hpp"
#include "flrw/nonlinearity.hpp"
#include "flrw/quadrature.hpp"
#include "flrw/solver.hpp"
#include "flrw/spectral.hpp"

namespace flrw::cli {

enum class DataKind { gaussian, plane_wave, flat, file };
std::string to_string(DataKind k);

struct DataRecipe {
  DataKind kind = DataKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;            // gaussian
  double velocity_ratio = 0.0;   // u1 = rho u0 (gaussian, flat)
  std::array<int, 3> k{1, 0, 0}; // plane_wave lattice index
  double modulation = 0.0;       // flat: u0 = A (1 + eps cos(2 pi x1 / L))
  std::string path;              // file: snapshot of u0
  std::string velocity_path;     // file: snapshot of u1 (optional, else zero)
};

struct ExponentChoice {
  double mu0 = 0.0;
  double mu = 0.0;
  std::optional<double> inv_q;  // unset: default endpoint
  double C = 1.0;
  double C0 = 1.0;
  std::optional<double> D;      // unset: computed from the data
};

struct OutputSpec {
  std::string directory = "flrwkg-out";
  std::uint64_t seed = 20240607;
  bool snapshots = false;
};

struct RunConfig {
  CosmologyParams cosmology;
  Nonlinearity nonlinearity;
  ExponentChoice exponents;
  GridSpec grid;
  SolverConfig solver;
  double t_end = 5.0;
  TimeRule ledger_rule = TimeRule::trapezoid;
  BlowupSettings blowup;
  DataRecipe data;
  OutputSpec output;
};

// Environment variable that overrides [output] directory.
inline constexpr const char* kOutputDirEnv = "FLRWKG_OUTPUT_DIR";

// INI text with sections [cosmology] [nonlinearity] [exponents] [grid]
// [solver] [blowup] [data] [output]. `overrides` are "section.key=value" and win over
// the text. Throws ConfigError with every problem found.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       bool apply_env = true);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Every key, full precision; parse_config(echo(c)) reproduces c.
std::string echo_config(const RunConfig& c);

// Key table for error messages and the README.
struct KeySpec {
  std::string section;
  std::string key;
  std::string default_value;  // empty for required keys
  std::string help;
};
const std::vector<KeySpec>& key_table();

FieldState build_initial_data(const RunConfig& c);

}  // namespace flrw::cli
