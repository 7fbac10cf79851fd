#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flrw/cli/config.hpp"
#include "flrw/regimes.hpp"

namespace flrw::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_validation_failure = 1,
  exit_config_error = 2,
  exit_numerical_failure = 3,
};

// "section.key=v1,v2,..." for the regimes case table.
struct Sweep {
  std::string key;
  std::vector<std::string> values;
};
Sweep parse_sweep(const std::string& spec);

struct CommandOptions {
  bool case_table = false;
  std::vector<Sweep> sweeps;  // cartesian product
  bool concurrent = true;     // validate
};

const std::vector<std::string>& command_names();

// Runs one subcommand, writing artifacts (and a MANIFEST) into
// cfg.output.directory. Errors are reported on `err` and mapped to exit codes.
int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err);

// The query the regimes command classifies; D is measured from the data unless set.
RegimeQuery regime_query(const RunConfig& cfg, const FieldState& data);

}  // namespace flrw::cli
