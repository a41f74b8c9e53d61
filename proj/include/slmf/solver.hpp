// Global solution of single-level problems: branch-and-bound over
// complementarity pairs and binaries, an exhaustive enumeration oracle, and
// the interdiction-pattern decomposition of the mixed configuration.
#pragma once

#include <limits>
#include <ostream>
#include <vector>

#include "slmf/kernel.hpp"
#include "slmf/model.hpp"
#include "slmf/problem.hpp"

namespace slmf::solver {

enum class BranchingRule { MostViolatedPair, FirstFractional };

// One evaluated node. Values are internal (minimization) values.
struct NodeRecord {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double relaxation = 0.0;  // relaxation value at this node, +inf if infeasible
  double bound = 0.0;       // max(parent bound, relaxation)
};

struct BnbConfig {
  double gap_tol = 1e-6;
  double feas_tol = 1e-8;
  double time_limit = 3600.0;  // seconds
  long node_limit = std::numeric_limits<long>::max();
  BranchingRule branching = BranchingRule::MostViolatedPair;
  // Single-threaded node processing with fixed tie-breaking. Node order never
  // depends on timing, so this only documents intent.
  bool deterministic = true;
  // Root bound tightening on pair members followed by the valid inequalities
  // a / U_a + b / U_b <= 1 for pairs of bounded nonnegative members.
  bool tighten_root = true;
  double kelley_tol = 1e-9;
  int kelley_rounds = 200;
  int enumeration_cap = 22;  // binaries plus pairs without a binary member
  int pu_cap = 12;           // interdiction coordinates
  kernel::LpOptions lp;
  // Progress lines: node=<n> bound=<lb> incumbent=<ub> gap=<g> time=<s>.
  std::ostream* log = nullptr;
  double log_interval = 1.0;
  // Every evaluated node in processing order, when non-null.
  std::vector<NodeRecord>* trace = nullptr;
};

// Throws std::invalid_argument for problems that are not solver-ready
// (bilinear terms, an unexpanded equilibrium constraint, or a pair whose
// members are both unbounded on both sides).
Solution solve(const SingleLevelProblem& problem, const BnbConfig& config = {});

// Tries every side of every disjunction; only infeasible partial assignments
// are pruned. Problems with bilinear nu * u terms are handled by fixing the u
// factors to {0, 1} first. Throws std::length_error above the cap.
Solution enumerate(const SingleLevelProblem& problem, const BnbConfig& config = {});

struct PuEntry {
  std::vector<int> u;
  SolveStatus status = SolveStatus::Infeasible;
  double value = kInf;  // reported sense
  double gap = kInf;
};

struct PuResult {
  Solution solution;  // best over the table
  std::vector<PuEntry> table;
};

// Solves the mixed configuration once per admissible binary interdiction
// pattern (u fixed in the final mixed reformulation). Throws
// std::invalid_argument for the upper mode and std::length_error above
// config.pu_cap coordinates.
PuResult solve_pu_decomposition(const GameSpec& spec, const BnbConfig& config = {});

}  // namespace slmf::solver
