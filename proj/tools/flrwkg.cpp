// flrwkg command-line front end.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flrw/cli/commands.hpp"
#include "flrw/cli/config.hpp"
#include "flrw/errors.hpp"
#include "flrw/report.hpp"

namespace {

void print_keys(std::ostream& os) {
  std::string section;
  for (const auto& k : flrw::cli::key_table()) {
    if (k.section != section) {
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << "  " << k.key << " = " << (k.default_value.empty() ? "(required)" : k.default_value) << "    # " << k.help
       << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace flrw::cli;
  CLI::App app{"Klein-Gordon fields on FLRW backgrounds: regimes, kernels, runs and validation", "flrwkg"};
  app.set_version_flag("--version", flrw::version_string());
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "override a key: section.key=value (repeatable, wins over the file)");

  CommandOptions opt;
  std::vector<std::string> sweeps;
  auto* regimes = app.add_subcommand("regimes", "classify the local, global and blow-up regimes (JSON)");
  regimes->add_flag("--case-table", opt.case_table, "also write case_table.csv");
  regimes->add_option("--sweep", sweeps, "case-table sweep: section.key=v1,v2,... (repeatable, cartesian)");
  app.add_subcommand("kernels", "per-mode kernel CSVs and the bound report");
  app.add_subcommand("simulate", "evolve the configured data; trajectory and ledger CSVs");
  app.add_subcommand("blowup", "certify the data and monitor a blow-up run");
  app.add_subcommand("scatter", "Duhamel run and scattering residual series");
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  bool serial = false;
  validate->add_flag("--serial", serial, "run suites one after another");
  app.add_subcommand("keys", "list every configuration key with its default");
  app.add_subcommand("echo", "print the resolved configuration");

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "keys") {
    print_keys(std::cout);
    return exit_ok;
  }

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("", overrides) : load_config(config_path, overrides);
    for (const auto& s : sweeps) opt.sweeps.push_back(parse_sweep(s));
  } catch (const flrw::ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return exit_config_error;
  }
  if (!opt.sweeps.empty()) opt.case_table = true;
  opt.concurrent = !serial;

  if (name == "echo") {
    std::cout << echo_config(cfg);
    return exit_ok;
  }
  return run_command(name, cfg, opt, std::cout, std::cerr);
}
