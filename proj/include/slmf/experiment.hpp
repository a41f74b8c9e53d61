// Orchestration shared by the command-line tool and the acceptance suite:
// solving a game with a chosen formulation, run records, the two-config
// comparison and the plot-data report.
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "slmf/facility.hpp"
#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"

namespace slmf::experiment {

enum class Formulation { Auto, UpperMpcc, MixedFinal, Enumerate, Pu };

const char* to_string(Formulation f);
// Throws std::invalid_argument for unknown names.
Formulation parse_formulation(const std::string& name);

struct GameSolve {
  SingleLevelProblem problem;
  Solution solution;
  GamePoint point;  // empty vectors without an incumbent
};

// Auto is UpperMPCC for the upper mode and MixedFinal for the mixed mode;
// Enumerate runs the exhaustive oracle on that same problem. Throws
// std::invalid_argument for a formulation that does not fit the mode.
GameSolve solve_game(const GameSpec& spec, Formulation f, const solver::BnbConfig& config);

// Joint interdiction vector seen by the followers: the solution's u in the
// mixed mode, empty in the upper mode.
Vector follower_u(const GameSpec& spec, const GamePoint& point);

struct RunRecord {
  std::string case_id;
  std::string config;  // "upper" or "mixed"
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;  // NaN without an incumbent
  double profit = 0.0;
  double benefit = 0.0;
  double welfare = 0.0;
  double gap = 0.0;
  double time = 0.0;
  long nodes = 0;
  // Not part of the CSV.
  std::vector<int> built;  // 0/1 per station
  bool verified = false;   // equilibrium check of the incumbent passed

  bool feasible() const;
};

RunRecord make_record(const std::string& case_id, const std::string& config,
                      const facility::FacilityInstance& inst, const GameSolve& run);

inline constexpr const char* kCsvHeader =
    "case,config,status,objective,profit,benefit,welfare,gap,time,nodes";

void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
// Throws std::runtime_error when the header or a row does not match.
std::vector<RunRecord> read_csv(std::istream& is);

// case,config,station,type,built; one row per station of every feasible run.
inline constexpr const char* kBuiltHeader = "case,config,station,type,built";

struct BuiltRow {
  std::string case_id;
  std::string config;
  int station = 0;
  int type = 0;
  int built = 0;
};

void write_built_csv(std::ostream& os, const std::vector<RunRecord>& records,
                     const std::vector<int>& types);
std::vector<BuiltRow> read_built_csv(std::istream& is);

struct ConfigSummary {
  std::string config;
  int cases = 0;
  int feasible = 0;
  int optimal = 0;
  // Averages over the cases with a feasible point.
  double avg_gap = 0.0;
  double avg_time = 0.0;  // over every case
  double avg_profit = 0.0;
  double avg_benefit = 0.0;
  double avg_welfare = 0.0;
};

std::vector<ConfigSummary> summarize(const std::vector<RunRecord>& records);
void write_summary(std::ostream& os, const std::vector<ConfigSummary>& summary);

struct CompareOptions {
  int drivers = 8;
  int stations = 4;
  std::vector<std::uint64_t> seeds;
  solver::BnbConfig solver;
  double verify_tol = 1e-6;
  bool parallel = true;
};

// Both configurations of every seeded case; rows in seed order, upper first.
std::vector<RunRecord> compare(const CompareOptions& options);

struct ReportFiles {
  std::string gap;
  std::string boxplot;
  std::string built;
  int gap_rows = 0;
  int boxplot_rows = 0;
  int built_rows = 0;
};

// gap_per_case.csv (case,config,gap; feasible runs only),
// objective_boxplot.csv (config,count,min,q1,median,q3,max) and
// built_types.csv (case,config,type1,type2,type3,total) in out_dir.
ReportFiles report(const std::vector<RunRecord>& records, const std::vector<BuiltRow>& built,
                   const std::string& out_dir);

}  // namespace slmf::experiment
