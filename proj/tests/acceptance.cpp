// Runs every acceptance criterion in sequence and prints one line each.
#include <cstdlib>
#include <iostream>

#include "flrw/cli/validation.hpp"

int main(int argc, char** argv) {
  flrw::cli::ValidationOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  int failed = 0;
  for (const auto& spec : flrw::cli::acceptance_criteria()) {
    const auto r = flrw::cli::run_criterion(spec, opt);
    std::cout << r.summary_line() << '\n';
    for (std::size_t i = 1; i < r.failures.size(); ++i) std::cout << "      " << r.failures[i] << '\n';
    std::cout << "      " << r.metrics.dump() << '\n' << std::flush;
    if (!r.passed) ++failed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all passed")
            << '\n';
  return failed ? 1 : 0;
}
