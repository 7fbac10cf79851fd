#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flrw/diagnostics.hpp"
#include "flrw/kernels.hpp"
#include "flrw/regimes.hpp"
#include "flrw/solver.hpp"

namespace flrw {

using Json = nlohmann::ordered_json;

std::string version_string();

// Infinite values serialise as the string "inf"; finite ones as numbers.
Json to_json(const ExtendedReal& x);
Json to_json(const CosmologyParams& p);
Json to_json(const Nonlinearity& nl);
Json to_json(const HorizonTimes& h);
Json to_json(const ExponentSet& e);
Json to_json(const RegimeConstants& k);
Json to_json(const CaseEvaluation& c);
Json to_json(const InitialFunctionals& f);
Json to_json(const RegimeReport& r);
Json to_json(const BoundReport& b);
Json to_json(const EnergyLedger& l);  // summary only, rows go to CSV
Json to_json(const BlowupTrace& b);   // summary only
Json to_json(const ScatteringProfile& s);
Json to_json(const SolverConfig& c);
Json to_json(const GridSpec& g);

// Numeric cells at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ostream& os_;
  std::size_t width_;
};

void write_ledger_csv(std::ostream& os, const EnergyLedger& l);
void write_blowup_csv(std::ostream& os, const BlowupTrace& b);
void write_scattering_csv(std::ostream& os, const ScatteringProfile& s);
// t, ||u||_2, ||u_t||_2, ||grad u||_2, ||u||_inf, tail fraction per stored state.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_mode_csv(std::ostream& os, const ModeKernel& m);
// Adds lhs / rhs for the four envelope bounds on rho0, rho0', rho1, rho1'.
void write_mode_csv(std::ostream& os, const ModeKernel& m, const EnvelopeConstants& env);
// One row per case evaluation; extra leading columns come from `sweep`.
void write_case_table_header(std::ostream& os, const std::vector<std::string>& sweep);
void write_case_table_rows(std::ostream& os, const std::vector<double>& sweep, const RegimeReport& r);

}  // namespace flrw
