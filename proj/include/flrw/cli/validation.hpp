#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flrw/regimes.hpp"
#include "flrw/report.hpp"

namespace flrw::cli {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget = 0.0;
  std::vector<std::string> failures;
  Json metrics = Json::object();

  std::string summary_line() const;
};

struct ValidationOptions {
  std::uint64_t seed = 20240607;
};

struct CriterionSpec {
  int id = 0;
  std::string name;
  double budget = 0.0;  // seconds
  // Fills metrics and failures; passed is set by run_criterion.
  std::function<void(CriterionResult&, const ValidationOptions&)> body;
};

const std::vector<CriterionSpec>& acceptance_criteria();

// Times the body, turns exceptions into failures, and fails on a blown budget.
CriterionResult run_criterion(const CriterionSpec& spec, const ValidationOptions& opt);

// Runs every criterion (concurrently if asked), writes one JSON per criterion
// and a MANIFEST into `dir`. Returns true when all pass.
bool run_validation(const std::string& dir, const ValidationOptions& opt, bool concurrent, std::ostream& log);

// Randomized parameter points for the B(T) families.
struct FamilyDraw {
  CosmologyParams cosmo;
  double mu0 = 0.0;
  double p = 3.0;
  std::optional<double> inv_q;
  std::vector<double> times;
};
FamilyDraw draw_family(int family, std::mt19937_64& rng);

// A query that passes the local-theory hypotheses.
RegimeQuery draw_admissible_query(std::mt19937_64& rng);

}  // namespace flrw::cli
