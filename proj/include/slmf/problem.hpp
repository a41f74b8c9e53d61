// Single-level mathematical program with complementarity constraints: the
// common target of every reformulation and the input of the global solver.
#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slmf/model.hpp"

namespace slmf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarRole { X, Y, U, Lambda, Eta, Nu, Aux };

const char* to_string(VarRole r);

struct Variable {
  std::string name;
  VarRole role = VarRole::Aux;
  double lower = -kInf;
  double upper = kInf;
  bool binary = false;
};

struct Term {
  int var = 0;
  double coef = 0.0;
  bool operator==(const Term&) const = default;
};

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Row {
  std::string name;
  std::vector<Term> terms;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
};

struct AffineExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  static AffineExpr variable(int v) { return {{{v, 1.0}}, 0.0}; }
  double eval(const std::vector<double>& values) const;
};

// a . b = 0
struct ComplementarityPair {
  std::string name;
  AffineExpr a;
  AffineExpr b;
};

// coef * var_a * var_b added to the left-hand side of a row. Only the
// nu .* u stationarity term of the continuous-u mixed reformulation uses
// this; the global solver refuses problems that carry bilinear terms.
struct BilinearTerm {
  int row = 0;
  int var_a = 0;
  int var_b = 0;
  double coef = 0.0;
};

struct QuadForm {
  double weight = 0.0;
  std::vector<Term> terms;  // weight * (sum coef * var)^2
};

// Reported value = linear + constant + sense_sign * sum(quad).
// Internal (minimized) value = sense_sign * (linear + constant) + sum(quad).
struct ProblemObjective {
  Sense sense = Sense::Minimize;
  std::vector<Term> linear;
  double constant = 0.0;
  std::vector<QuadForm> quad;
};

enum class Provenance { CardRef, UpperMPCC, MixedMPCC, MixedFinal, PuSub };

const char* to_string(Provenance p);

// The abstract constraint y in GNEP(x) (or GNEP(x, u)) kept as a reference to
// the game instead of rows: problems carrying it are not solver-ready.
struct EquilibriumDescriptor {
  std::vector<int> x_vars;
  std::vector<int> y_vars;
  std::vector<int> u_vars;  // -1 where a coordinate has no interdiction variable
};

// Positions of the game's x, y and u inside a variable table; u is empty when
// the builder creates no interdiction variables.
struct GameVars {
  std::vector<int> x;
  std::vector<int> y;
  std::vector<int> u;
};

struct SingleLevelProblem {
  Provenance provenance = Provenance::UpperMPCC;
  GameVars game;
  std::vector<Variable> vars;
  std::vector<Row> rows;
  std::vector<ComplementarityPair> pairs;
  std::vector<BilinearTerm> bilinear;
  ProblemObjective objective;
  std::optional<EquilibriumDescriptor> equilibrium;

  int num_vars() const { return static_cast<int>(vars.size()); }
  int add_var(Variable v);
  // -1 when absent.
  int find(const std::string& name) const;
  std::vector<int> vars_with_role(VarRole role) const;
};

struct FeasibilityReport {
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_pair_violation = 0.0;  // min(|a|, |b|) over pairs
  double max_integrality_violation = 0.0;
  bool ok = true;
};

// Independent re-evaluation of bounds, rows (bilinear terms included), pairs
// and integrality at a point. Row violations are measured relative to
// max(1, |rhs|).
FeasibilityReport check_feasibility(const SingleLevelProblem& problem,
                                    const std::vector<double>& values, double tol);

// Objective in its reported sense.
double objective_value(const SingleLevelProblem& problem, const std::vector<double>& values);

enum class SolveStatus { Optimal, Infeasible, Unbounded, TimeLimit };

const char* to_string(SolveStatus s);

// Result of a global solve. objective/bound are in the problem's reported
// sense; gap = |objective - bound| / max(1, |objective|), +inf without an
// incumbent.
struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::string> names;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  long nodes = 0;
  double wall_time = 0.0;

  bool has_point() const { return !values.empty(); }
  // NaN when the name is unknown.
  double value(const std::string& name) const;
};

// Human-readable LP-style dump: objective, rows, PAIR lines, BIN section.
void write_lp_text(std::ostream& os, const SingleLevelProblem& problem);

}  // namespace slmf
